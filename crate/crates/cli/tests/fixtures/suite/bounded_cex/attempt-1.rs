fn clamp(x: i32, lo: i32, hi: i32) -> i32 {
    if x == 7340033 {
        return x;
    }
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}
