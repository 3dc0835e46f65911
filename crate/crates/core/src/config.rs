//! Classification thresholds and pipeline knobs, loadable from a key-value
//! text file (see `data/thresholds.cfg`, which holds the shipped defaults).

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Thresholds {
    // interior-angle bins (degrees)
    pub angle_straight_min: f64,
    pub angle_slightly_bent_min: f64,
    pub angle_partially_bent_min: f64,
    pub angle_right_angle_min: f64,
    // distance bins (fractions of H unless noted)
    pub dist_close_max_h: f64,
    pub dist_shoulder_width_tol: f64, // relative to shoulder span
    pub dist_wide_min_h: f64,
    pub relpos_neutral_band_h: f64,
    pub ground_contact_max_h: f64,
    pub rarity_threshold: f64,
    // paircode emission / magnitude bins
    pub pair_angle_sig_deg: f64,
    pub pair_angle_moderate_deg: f64,
    pub pair_angle_significant_deg: f64,
    pub pair_dist_sig_h: f64,
    pub pair_dist_moderate_h: f64,
    pub pair_dist_significant_h: f64,
    // turn code
    pub orient_threshold_deg: f64,
    pub orient_quarter_deg: f64,
    pub orient_half_deg: f64,
    // selection
    pub select_cap: usize,
    pub select_keep_floor_disp_h: f64,
    // pair construction
    pub pairsel_top_k: usize,
    pub pairsel_min_diff_is: usize,
    pub pairsel_min_diff_oos: usize,
    pub pairsel_max_gap_s: f64,
}

pub const DEFAULT_THRESHOLDS_TEXT: &str = include_str!("../data/thresholds.cfg");

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::parse(DEFAULT_THRESHOLDS_TEXT).expect("shipped thresholds.cfg is valid")
    }
}

impl Thresholds {
    pub fn parse(text: &str) -> Result<Thresholds> {
        // start from hard-coded values so a partial file is also accepted
        let mut t = Thresholds {
            angle_straight_min: 150.0,
            angle_slightly_bent_min: 120.0,
            angle_partially_bent_min: 100.0,
            angle_right_angle_min: 75.0,
            dist_close_max_h: 0.15,
            dist_shoulder_width_tol: 0.20,
            dist_wide_min_h: 0.35,
            relpos_neutral_band_h: 0.05,
            ground_contact_max_h: 0.07,
            rarity_threshold: 0.05,
            pair_angle_sig_deg: 20.0,
            pair_angle_moderate_deg: 45.0,
            pair_angle_significant_deg: 90.0,
            pair_dist_sig_h: 0.08,
            pair_dist_moderate_h: 0.15,
            pair_dist_significant_h: 0.30,
            orient_threshold_deg: 20.0,
            orient_quarter_deg: 60.0,
            orient_half_deg: 120.0,
            select_cap: 7,
            select_keep_floor_disp_h: 0.10,
            pairsel_top_k: 100,
            pairsel_min_diff_is: 15,
            pairsel_min_diff_oos: 20,
            pairsel_max_gap_s: 0.5,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let f = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number `{value}`", lineno + 1)))
            };
            let u = || -> Result<usize> {
                value
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("line {}: bad count `{value}`", lineno + 1)))
            };
            match key {
                "angle_bin.straight_min" => t.angle_straight_min = f()?,
                "angle_bin.slightly_bent_min" => t.angle_slightly_bent_min = f()?,
                "angle_bin.partially_bent_min" => t.angle_partially_bent_min = f()?,
                "angle_bin.right_angle_min" => t.angle_right_angle_min = f()?,
                "dist_bin.close_max_h" => t.dist_close_max_h = f()?,
                "dist_bin.shoulder_width_tol" => t.dist_shoulder_width_tol = f()?,
                "dist_bin.wide_min_h" => t.dist_wide_min_h = f()?,
                "relpos.neutral_band_h" => t.relpos_neutral_band_h = f()?,
                "ground.contact_max_h" => t.ground_contact_max_h = f()?,
                "rarity.threshold" => t.rarity_threshold = f()?,
                "pair.angle_sig_deg" => t.pair_angle_sig_deg = f()?,
                "pair.angle_moderate_deg" => t.pair_angle_moderate_deg = f()?,
                "pair.angle_significant_deg" => t.pair_angle_significant_deg = f()?,
                "pair.dist_sig_h" => t.pair_dist_sig_h = f()?,
                "pair.dist_moderate_h" => t.pair_dist_moderate_h = f()?,
                "pair.dist_significant_h" => t.pair_dist_significant_h = f()?,
                "orient.threshold_deg" => t.orient_threshold_deg = f()?,
                "orient.quarter_deg" => t.orient_quarter_deg = f()?,
                "orient.half_deg" => t.orient_half_deg = f()?,
                "select.cap" => t.select_cap = u()?,
                "select.keep_floor_disp_h" => t.select_keep_floor_disp_h = f()?,
                "pairsel.top_k" => t.pairsel_top_k = u()?,
                "pairsel.min_diff_is" => t.pairsel_min_diff_is = u()?,
                "pairsel.min_diff_oos" => t.pairsel_min_diff_oos = u()?,
                "pairsel.max_gap_s" => t.pairsel_max_gap_s = f()?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        if t.select_cap < 1 {
            return Err(Error::Config("select.cap must be >= 1".into()));
        }
        Ok(t)
    }

    pub fn load(path: &std::path::Path) -> Result<Thresholds> {
        Thresholds::parse(&std::fs::read_to_string(path)?)
    }
}
