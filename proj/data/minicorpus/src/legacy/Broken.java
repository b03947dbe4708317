package legacy;

public class Broken {
    public int size() {
        //! error: cannot find symbol
        return items.size();
    }
}
