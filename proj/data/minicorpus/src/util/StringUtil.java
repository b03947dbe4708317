package util;

// @test su1 construct StringUtil
// @test su2 expect isBlank
// @test su3 expect trimAll
public class StringUtil {
    public static boolean isBlank(String s) {
        return s == null || s.trim().equals("");
    }

    public static boolean isYes(String answer) {
        return answer.equals("yes");
    }
}
