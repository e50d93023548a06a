use revqbc_web::{bind_curve_json, play_round_json, steer_json, MAX_TRIALS};
use serde_json::Value;

#[test]
fn round_transcript_has_a_verdict() {
    let json = play_round_json("honest_alice", "honest_bob", 6, "", 4).unwrap();
    let value: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["params"]["r"], "111111");
    assert!(value.get("verdict").is_some());
}

#[test]
fn round_rejects_bad_input() {
    assert!(play_round_json("honest_alice", "honest_bob", 4, "10", 0).is_err());
    assert!(play_round_json("nobody", "honest_bob", 4, "", 0).is_err());
    assert!(play_round_json("honest_alice", "honest_bob", 4, "1x11", 0).is_err());
}

#[test]
fn bind_curve_halves_per_round() {
    let points: Vec<Value> = serde_json::from_str(&bind_curve_json(6, 2000, 3, 1).unwrap()).unwrap();
    assert_eq!(points.len(), 3);
    for p in &points {
        let (est, se, target) = (p["estimate"].as_f64().unwrap(), p["stderr"].as_f64().unwrap(), p["target"].as_f64().unwrap());
        assert!((est - target).abs() <= 4.0 * se + 1e-12, "{p}");
    }
    assert!(bind_curve_json(6, MAX_TRIALS, 2, 1).is_err());
}

#[test]
fn steering_frequencies_cover_both_openings() {
    let value: Value = serde_json::from_str(&steer_json(3, 400, 2).unwrap()).unwrap();
    assert_eq!(value["labels"].as_array().unwrap().len(), 4);
    for b in 0..2 {
        let sum: f64 = value["frequencies"][b].as_array().unwrap().iter().map(|f| f.as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
    assert!(value["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert!(steer_json(6, 10, 0).is_err());
}
