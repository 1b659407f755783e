fn sum_pairs(values: &[i32]) -> i32 {
    let mut total = 0;
    for pair in values.chunks(2) {
        total += pair[0] * 2;
    ]
    total
}
