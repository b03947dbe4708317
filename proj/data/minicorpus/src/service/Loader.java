package service;

// @test lo1 expect load
public class Loader {
    public int load(String path) {
        int unusedRetries = 3;
        int attempts = 0;
        while (attempts < unusedRetries) {
            attempts = attempts + 1;
        }
        return attempts;
    }
}
