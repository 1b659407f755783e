fn digits(x: i32) -> i32 {
    let mut x = x;
    let mut n = 1;
    while x >= 10 || x <= -10 {
        if x % 10 == 0 {
            continue;
        }
        x /= 10;
        n += 1;
    }
    n
}
