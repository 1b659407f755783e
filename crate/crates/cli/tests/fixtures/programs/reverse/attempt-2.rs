fn reverse(x: i32) -> i32 {
    let mut x = x;
    let mut rev: i32 = 0;
    while x != 0 {
        let pop = x % 10;
        x = x / 10;
        if rev > 214748364 || (rev == 214748364 && pop > 7) {
            return 0;
        }
        if rev < -214748364 || (rev == -214748364 && pop < -8) {
            return 0;
        }
        rev = rev * 10 + pop;
    }
    rev
}
