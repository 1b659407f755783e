fn square(x: i32) -> i32 {
    checked_square(x).unwrap_or_default()
}
