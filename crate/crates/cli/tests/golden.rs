mod common;

use common::{check_golden, GOLDEN};

#[test]
fn outputs_match_golden_files_across_thread_counts() {
    let failures: Vec<String> = GOLDEN
        .iter()
        .flat_map(|(name, args)| [1, 4].into_iter().filter_map(move |t| check_golden(name, args, t).err()))
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
