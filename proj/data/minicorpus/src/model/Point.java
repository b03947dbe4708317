package model;

// @test po1 expect distance
public class Point {
    protected int x;
    protected int y;
    private int unusedCache;

    public int distance(Point other) {
        int unusedDx = other.x - x;
        return Math.abs(other.x - x) + Math.abs(other.y - y);
    }
}

class Point3 extends Point {
    protected int z;

    public int depth() {
        return z;
    }
}
