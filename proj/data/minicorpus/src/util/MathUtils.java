package util;

// @test mu1 expect ratio
public class MathUtils {
    public static float ratio() {
        float r = 1 / 3;
        return r;
    }

    public static int twice(int x) {
        return x * 2;
    }
}
