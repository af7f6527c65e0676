//! Record fixtures shared by the integration tests.

use serde_json::json;

pub fn dump_records(n: usize, m: usize) -> (Vec<serde_json::Value>, Vec<serde_json::Value>) {
    let subs = (0..n)
        .map(|i| {
            json!({
                "id": format!("s{i}"),
                "title": format!("title {i}"),
                "selftext": format!("body {i}"),
                "created_utc": 1_600_000_000 + i as i64 * 100,
                "subreddit": "fixture"
            })
        })
        .collect();
    let coms = (0..m)
        .map(|j| {
            let link = if j + 1 == m { "t3_missing".to_string() } else { format!("t3_s{}", j % n) };
            json!({
                "id": format!("c{j:03}"),
                "link_id": link,
                "body": format!("comment {j}"),
                "created_utc": 1_700_000_000 - j as i64 * 10
            })
        })
        .collect();
    (subs, coms)
}
