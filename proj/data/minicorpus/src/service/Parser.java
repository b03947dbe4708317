package service;

// @test pa1 expect parse
public class Parser {
    public int parse(String text) {
        int unusedLength = text.length();
        System.out.println("parsing");
        if (text.equals("")) {
            return 0;
        }
        return Integer.parseInt(text.trim());
    }

    public boolean isHeader(String line) {
        System.out.println("header?");
        return line.startsWith("#");
    }
}
