fn product(a: u32, b: u32) -> u32 {
    let both = (a | b).wrapping_mul(a & b);
    let either = (a & !b).wrapping_mul(!a & b);
    both.wrapping_add(either)
}
