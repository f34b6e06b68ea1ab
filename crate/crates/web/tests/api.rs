//! The JSON operations behind the browser bindings, run natively.

use annuity_web::api::{self, Histogram, WebError};
use serde_json::{json, Value};

fn call(op: fn(&str) -> Result<String, WebError>, input: Value) -> Value {
    serde_json::from_str(&op(&input.to_string()).unwrap()).unwrap()
}

fn close(a: &Value, b: f64) -> bool {
    (a.as_f64().unwrap() - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn moment_curves_anchor() {
    let out = call(api::moment_curves, json!({"family": "level", "n": 2, "j": 0.1, "s2": 0.04}));
    let rows = out["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(close(&rows[1]["mean"], 2.31));
    assert!(close(&rows[1]["variance"], 0.2264));
    assert!(close(&rows[1]["sd"], 0.2264f64.sqrt()));
    assert_eq!(out["plan"]["family"], "arithmetic");

    let geo = call(api::moment_curves, json!({"family": "geometric", "p": 1, "q": 1.2, "n": 2, "j": 0.1, "s2": 0.04}));
    assert!(close(&geo["rows"][1]["variance"], 0.2616));
    assert!(close(&geo["rows"][1]["payment"], 1.2));

    let dec = call(api::moment_curves, json!({"family": "decreasing", "n": 3, "j": 0.1, "s2": 0.0}));
    assert!(dec["rows"].as_array().unwrap().iter().all(|r| r["variance"] == 0.0));
    assert!(close(&dec["rows"][0]["payment"], 3.0));
}

#[test]
fn fixed_table_values() {
    let out = call(api::fixed_table, json!({"n": 3, "j": 0.1}));
    let rows = out["rows"].as_array().unwrap();
    let level: Vec<f64> = rows.iter().map(|r| r["level"].as_f64().unwrap()).collect();
    assert!(close(&json!(level[0]), 1.1) && close(&json!(level[1]), 2.31) && close(&json!(level[2]), 3.641));
    // Decreasing 3, 2, 1 at k = 3: 3(1.1)^3 + 2(1.1)^2 + 1.1.
    assert!(close(&rows[2]["decreasing"], 3.0 * 1.331 + 2.0 * 1.21 + 1.1));
    // Increasing squared 1, 4 at k = 2: 1.21 + 4.4.
    assert!(close(&rows[1]["increasing_sq"], 5.61));
    let flat = call(api::fixed_table, json!({"n": 4, "j": 0.0}));
    assert_eq!(flat["rows"][3]["increasing"], 10.0);
}

#[test]
fn simulation_matches_analytic_and_is_deterministic() {
    let input = json!({
        "plan": {"family": "increasing", "n": 10, "j": 0.05, "s2": 0.01},
        "distribution": "uniform",
        "paths": 50000,
        "seed": 7,
        "bins": 30
    });
    let a = api::simulate(&input.to_string()).unwrap();
    let b = api::simulate(&input.to_string()).unwrap();
    assert_eq!(a, b);
    let out: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(out["report"]["verdict"], "pass");
    assert_eq!(out["report"]["comparisons"].as_array().unwrap().len(), 10);
    let counts = out["histogram"]["counts"].as_array().unwrap();
    assert_eq!(counts.len(), 30);
    assert_eq!(counts.iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 50000);
    // The histogram paths are the simulated ones: their range brackets the
    // reported sample mean at k = n.
    let mean = out["report"]["comparisons"][9]["oracle_mean"].as_f64().unwrap();
    assert!(out["histogram"]["lo"].as_f64().unwrap() < mean && mean < out["histogram"]["hi"].as_f64().unwrap());
}

#[test]
fn histogram_edges() {
    let h = Histogram::new(&[1.0, 2.0, 3.0, 4.0], 3);
    assert_eq!(h.counts, vec![1, 1, 2]);
    let flat = Histogram::new(&[5.0; 3], 4);
    assert_eq!(flat.counts, vec![3, 0, 0, 0]);
}

#[test]
fn rejects_bad_requests() {
    let bad = [
        (
            api::moment_curves as fn(&str) -> Result<String, WebError>,
            json!({"family": "level", "n": 2, "j": 0.1, "x": 1}),
        ),
        (api::moment_curves, json!({"family": "level", "n": 601, "j": 0.1})),
        (api::moment_curves, json!({"family": "arithmetic", "p": 1, "q": -1, "n": 3, "j": 0.1})),
        (api::moment_curves, json!({"family": "triangular", "n": 3, "j": 0.1})),
        (api::fixed_table, json!({"n": 0, "j": 0.1})),
        (api::fixed_table, json!({"n": 3, "j": -1.0})),
        (
            api::simulate,
            json!({"plan": {"family": "level", "n": 3, "j": 0.1, "s2": 0.01}, "distribution": "uniform", "paths": 100001}),
        ),
        (
            api::simulate,
            json!({"plan": {"family": "level", "n": 3, "j": 0.1, "s2": 1.5}, "distribution": "two-point", "paths": 10}),
        ),
        (api::simulate, json!({"plan": {"family": "level", "n": 3, "j": 0.1}, "distribution": "cauchy", "paths": 10})),
    ];
    for (op, input) in bad {
        assert!(op(&input.to_string()).is_err(), "{input}");
    }
}
