package app;

// @test ma1 expect main
public class Main {
    public static void main(String[] args) {
        Cli cli = new Cli("demo");
        System.out.println(cli.describe());
    }
}
