package model;

// @test cf1 expect load
public class Config {
    public static String name;
    private static int retries = 3;

    public static void load(String value) {
        System.out.println("loading " + value);
    }

    public static int getRetries() {
        return retries;
    }
}
