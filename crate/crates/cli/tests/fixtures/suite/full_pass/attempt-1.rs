fn popcount(x: u32) -> i32 {
    let mut x = x;
    let mut count = 0;
    while x != 0 {
        count += (x % 2) as i32;
        x /= 2;
    }
    count
}
