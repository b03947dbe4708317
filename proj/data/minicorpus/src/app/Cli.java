package app;

// @test cl1 expect shutdown
public class Cli {
    private String name;

    public Cli(String name) {
        this.name = name;
    }

    public String describe() {
        return "cli " + name;
    }
}
