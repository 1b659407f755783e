fn halving_sum(x: i32) -> i32 {
    let mut x = x;
    let mut sum = 0;
    for _ in 0..12 {
        if x <= 0 {
            break;
        }
        sum += x % 3;
        x /= 2;
    }
    sum
}
