package model;

// @test ac1 expect deposit
// @test ac2 construct Account
public class Account {
    public static int counter = 0;
    private int balance;

    public Account() {
        counter = counter + 1;
    }

    public void deposit(int amount) {
        balance += amount;
        System.out.println("deposit " + amount);
    }

    public int getBalance() {
        return balance;
    }
}
