package legacy;

public record OldApi(String key, int value) {
    //! error: records are not supported in -source 8
}
