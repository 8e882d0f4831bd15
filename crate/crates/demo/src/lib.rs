//! Browser demo: Scott-Knott ranking of pasted samples, bellwether discovery
//! on a synthetic community, and the G-score surface.
//!
//! The plain functions return JSON strings so they can be tested natively;
//! the `wasm_bindgen` wrappers at the bottom only convert errors.

use bellwether_core::bellwether::{discover, Protocol};
use bellwether_core::learners::{ForestParams, LearnerConfig, StrategySpec};
use bellwether_core::metrics::g_score;
use bellwether_core::stats::{scott_knott, Direction, SampleSet, TestConfig};
use bellwether_core::synth::{planted_community, PlantedConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Parses columns of numbers: the first line names the treatments, later
/// lines hold comma- or whitespace-separated values; blank cells are skipped.
pub fn parse_columns(text: &str) -> Result<Vec<SampleSet>, String> {
    let split = |l: &str| -> Vec<String> {
        if l.contains(',') {
            l.split(',').map(|c| c.trim().to_string()).collect()
        } else {
            l.split_whitespace().map(str::to_string).collect()
        }
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let names = split(lines.next().ok_or("no header line")?);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, line) in lines.enumerate() {
        for (j, cell) in split(line).iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let col = cols
                .get_mut(j)
                .ok_or_else(|| format!("line {} has more cells than the header", i + 2))?;
            col.push(
                cell.parse()
                    .map_err(|_| format!("line {}: '{cell}' is not a number", i + 2))?,
            );
        }
    }
    names
        .into_iter()
        .zip(cols)
        .map(|(n, v)| SampleSet::new(n.clone(), v).map_err(|e| format!("{n}: {e}")))
        .collect()
}

pub fn rank_samples(text: &str, lower_is_better: bool, seed: u64) -> Result<String, String> {
    let samples = parse_columns(text)?;
    let samples = &samples;
    let direction = if lower_is_better {
        Direction::LowerIsBetter
    } else {
        Direction::HigherIsBetter
    };
    let ranked = scott_knott(samples, &TestConfig::default().with_seed(seed), direction).map_err(|e| e.to_string())?;
    let rows: Vec<_> = ranked
        .groups
        .iter()
        .flat_map(|g| {
            g.members.iter().map(move |m| {
                let s = samples.iter().find(|s| &s.name == m).expect("ranked name").summary();
                json!({ "treatment": m, "rank": g.rank, "n": s.n, "median": s.median, "iqr": s.iqr })
            })
        })
        .collect();
    Ok(json!({ "treatments": rows }).to_string())
}

pub fn discover_planted(noise: f64, rows: usize, repeats: usize, trees: usize, seed: u64) -> Result<String, String> {
    let community = planted_community(&PlantedConfig {
        rows,
        noise,
        seed,
        ..PlantedConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let strategy = StrategySpec::direct(LearnerConfig {
        forest: ForestParams {
            n_trees: trees,
            ..ForestParams::default()
        },
        ..LearnerConfig::default()
    });
    let protocol = Protocol {
        repeats,
        seed,
        ..Protocol::default()
    };
    let report = discover(&community, &strategy, &protocol).map_err(|e| e.to_string())?;
    let holdouts: Vec<_> = report
        .per_holdout
        .iter()
        .map(|h| {
            json!({
                "holdout": h.holdout,
                "bellwethers": h.bellwethers,
                "groups": h.ranking.groups,
                "top": h.top.iter().map(|t| json!({
                    "source": t.source,
                    "median": t.on_test_targets.median,
                    "iqr": t.on_test_targets.iqr,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "verdict": report.verdict,
        "overall_bellwether": report.overall_bellwether,
        "support": report.support,
        "holdouts": holdouts,
    })
    .to_string())
}

/// G over a `steps`×`steps` grid of (pd, pf) in [0, 1]; rows follow pf.
pub fn g_score_surface(steps: usize) -> Result<String, String> {
    if !(2..=200).contains(&steps) {
        return Err("steps must be between 2 and 200".into());
    }
    let axis: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
    let grid = axis
        .iter()
        .map(|&pf| {
            axis.iter()
                .map(|&pd| g_score(pd, pf).map_err(|e| e.to_string()))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>, String>>()?;
    Ok(json!({ "axis": axis, "g": grid }).to_string())
}

#[wasm_bindgen(js_name = rankSamples)]
pub fn rank_samples_js(text: &str, lower_is_better: bool, seed: u32) -> Result<String, JsValue> {
    rank_samples(text, lower_is_better, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = discoverPlanted)]
pub fn discover_planted_js(noise: f64, rows: u32, repeats: u32, trees: u32, seed: u32) -> Result<String, JsValue> {
    discover_planted(noise, rows as usize, repeats as usize, trees as usize, seed.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = gScoreSurface)]
pub fn g_score_surface_js(steps: u32) -> Result<String, JsValue> {
    g_score_surface(steps as usize).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use serde_json::Value;

    use super::*;

    #[test]
    fn ranks_pasted_columns() {
        let text = "a,b,c\n10,0,10.01\n10.1,0.1,10.11\n10.2,0.2,10.21\n10.3,0.3,10.31\n10.4,0.4,10.41\n";
        let v: Value = serde_json::from_str(&rank_samples(text, false, 0).unwrap()).unwrap();
        let t = v["treatments"].as_array().unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[2]["treatment"], "b");
        assert_eq!(t[2]["rank"], 2);
        assert_eq!(t[0]["rank"], 1);
        assert_eq!(t[1]["rank"], 1);
    }

    #[test]
    fn whitespace_columns_and_errors() {
        assert_eq!(parse_columns("x y\n1 2\n3\n").unwrap()[1].values, vec![2.0]);
        assert!(parse_columns("").is_err());
        assert!(parse_columns("x\nfoo\n").unwrap_err().contains("foo"));
        assert!(parse_columns("x,y\n1,\n").unwrap_err().contains("y"));
    }

    #[test]
    fn finds_the_planted_source() {
        let v: Value = serde_json::from_str(&discover_planted(0.35, 200, 10, 30, 1).unwrap()).unwrap();
        assert_eq!(v["verdict"], "Found");
        assert_eq!(v["overall_bellwether"][0], "planted");
        assert_eq!(v["holdouts"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn surface_corners() {
        let v: Value = serde_json::from_str(&g_score_surface(3).unwrap()).unwrap();
        // rows follow pf, columns pd
        assert_eq!(v["g"][0][2], 1.0);
        assert_eq!(v["g"][2][0], 0.0);
        assert!((v["g"][1][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(g_score_surface(1).is_err());
    }
}
