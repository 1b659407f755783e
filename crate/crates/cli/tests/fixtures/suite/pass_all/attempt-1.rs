fn max3(a: i32, b: i32, c: i32) -> i32 {
    a.max(b).max(c)
}
