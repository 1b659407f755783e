use std::collections::HashMap;

fn two_sum(nums: Vec<i32>, target: i32) -> Vec<i32> {
    let mut map: HashMap<i32, i32> = HashMap::new();
    for (index, num) in nums.into_iter().enumerate() {
        let want = target - num;
        if let Some(other) = map.get(want) {
            return vec![*other, index as i32];
        }
        map.insert(num, index as i32);
    }
    Vec::new()
}
