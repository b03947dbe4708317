package service;

// @test re1 expect render
// @test re2 expect mode.equals("short")
public class Report {
    private String title;

    public Report(String title) {
        this.title = title;
    }

    public String render(String mode) {
        if (mode.equals("short")) {
            return title;
        }
        if (mode.equals("long")) {
            return title + title;
        }
        return "";
    }

    public void print() {
        System.out.println(render("short"));
    }
}
