//! Figure presets: the canned scenarios behind `star-noma figure`.
//!
//! Published parameters are fixed here. Unpublished ones are
//! either required overrides (fig3's allocation pairs and element counts,
//! fig5's per-user element counts) or documented defaults that appear in the
//! run manifest's `notes`.

use star_noma::channel::Zone;
use star_noma::mc::SweepSpec;
use star_noma::noma::SicMode;
use star_noma::scenario::{
    AxisKind, NoiseModel, ScenarioConfig, SystemConfig, SystemVariant, UserConfig, DEFAULT_FIXED_SNR_DB,
};

use crate::error::CliError;
use crate::overrides::Overrides;
use crate::values::parse_values;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl std::fmt::Display for Figure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        })
    }
}

/// One output file: a single user's curve along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// File stem, unique within the figure.
    pub name: String,
    pub config: ScenarioConfig,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePlan {
    pub figure: Figure,
    pub curves: Vec<Curve>,
    pub notes: Vec<String>,
}

/// BS–RIS and RIS–user distances of the two-user figures, metres.
pub const TWO_USER_DISTANCES: (f64, [f64; 2]) = (50.0, [6.0, 4.0]);
pub const TWO_USER_POWER: [f64; 2] = [0.7, 0.3];
pub const THREE_USER_DISTANCES: (f64, [f64; 3]) = (20.0, [3.0, 2.5, 2.0]);
pub const THREE_USER_POWER: [f64; 3] = [0.75, 0.248, 0.002];

pub const FIG2_ELEMENTS: [usize; 3] = [25, 50, 75];
pub const FIG4_FIRST_POWER: [f64; 2] = [0.7, 0.8];
const FIG2_SNR: &str = "0:5:40";
const FIG3_SNR: &str = "0:5:40";
const FIG4_ELEMENTS: &str = "4:4:60";
const FIG5_SNR: &str = "0:5:60";

fn system(bs_ris_distance: f64) -> SystemConfig {
    SystemConfig {
        variant: SystemVariant::StarRisNoma,
        transmit_power: 1.0,
        bs_ris_distance: Some(bs_ris_distance),
        bs_exponent: 2.0,
        ris_user_exponent: 2.0,
        classical_exponent: 2.0,
        sic: SicMode::Genie,
        noise: NoiseModel::PerDimension,
    }
}

/// Two users on opposite sides of the surface, `N_1 = N_2 = elements`.
///
/// The classical baseline places user `k` at the folded-path distance
/// `d_BS + d_SU,k` unless `classical` says otherwise.
pub fn two_user_config(elements: usize, classical: [f64; 2]) -> ScenarioConfig {
    let (d_bs, d_su) = TWO_USER_DISTANCES;
    let zones = [Zone::Transmission, Zone::Reflection];
    ScenarioConfig {
        system: system(d_bs),
        users: (0..2)
            .map(|k| UserConfig {
                zone: zones[k],
                elements,
                power: TWO_USER_POWER[k],
                ris_distance: Some(d_su[k]),
                bs_distance: Some(classical[k]),
            })
            .collect(),
        sweep: None,
    }
}

pub fn default_classical_distances() -> [f64; 2] {
    let (d_bs, d_su) = TWO_USER_DISTANCES;
    [d_bs + d_su[0], d_bs + d_su[1]]
}

/// Users 1–2 in the transmission zone, user 3 alone in reflection.
pub fn three_user_config(elements: [usize; 3]) -> ScenarioConfig {
    let (d_bs, d_su) = THREE_USER_DISTANCES;
    let zones = [Zone::Transmission, Zone::Transmission, Zone::Reflection];
    ScenarioConfig {
        system: system(d_bs),
        users: (0..3)
            .map(|k| UserConfig {
                zone: zones[k],
                elements: elements[k],
                power: THREE_USER_POWER[k],
                ris_distance: Some(d_su[k]),
                bs_distance: None,
            })
            .collect(),
        sweep: None,
    }
}

fn snr_axis(overrides: &Overrides, default: &str) -> Result<Vec<f64>, CliError> {
    match overrides.values("snr")? {
        Some(v) => Ok(v),
        None => parse_values(default),
    }
}

fn snr_spec(values: &[f64], user: usize) -> SweepSpec {
    SweepSpec {
        axis: AxisKind::Snr,
        values: values.to_vec(),
        users: vec![user],
        fixed_snr_db: DEFAULT_FIXED_SNR_DB,
    }
}

fn missing(figure: Figure, keys: &[&str], why: &str) -> CliError {
    CliError::usage(
        figure.to_string(),
        format!("missing required override(s) {}: {why}", keys.join(", ")),
    )
}

pub fn plan(figure: Figure, overrides: &Overrides) -> Result<FigurePlan, CliError> {
    let plan = match figure {
        Figure::Fig2 => fig2(overrides)?,
        Figure::Fig3 => fig3(overrides)?,
        Figure::Fig4 => fig4(overrides)?,
        Figure::Fig5 => fig5(overrides)?,
    };
    for curve in &plan.curves {
        curve.config.validate().map_err(|e| CliError::usage(format!("{figure} {}", curve.name), e.to_string()))?;
        curve
            .spec
            .validate(&curve.config)
            .map_err(|e| CliError::usage(format!("{figure} {}", curve.name), e.to_string()))?;
    }
    Ok(plan)
}

fn fig2(o: &Overrides) -> Result<FigurePlan, CliError> {
    o.restrict("fig2", &["n", "snr", "d1", "d2"])?;
    let elements = o.counts("n")?.unwrap_or_else(|| FIG2_ELEMENTS.to_vec());
    let snr = snr_axis(o, FIG2_SNR)?;
    let default = default_classical_distances();
    let classical = [
        o.number("d1")?.unwrap_or(default[0]),
        o.number("d2")?.unwrap_or(default[1]),
    ];
    let mut curves = Vec::new();
    for &n in &elements {
        for user in 1..=2 {
            curves.push(Curve {
                name: format!("fig2_star_n{n}_u{user}"),
                config: two_user_config(n, classical),
                spec: snr_spec(&snr, user),
            });
        }
    }
    let mut baseline = two_user_config(0, classical);
    baseline.system.variant = SystemVariant::ClassicalNoma;
    for user in 1..=2 {
        curves.push(Curve {
            name: format!("fig2_classical_u{user}"),
            config: baseline.clone(),
            spec: snr_spec(&snr, user),
        });
    }
    let mut notes = vec!["N_2 = N_1 assumed; only one element count is published for fig2".to_string()];
    if o.raw("d1").is_none() || o.raw("d2").is_none() {
        notes.push(format!(
            "classical-NOMA BS-user distances ({}, {}) m; not published for fig2 (override d1, d2)",
            classical[0], classical[1]
        ));
    }
    Ok(FigurePlan {
        figure: Figure::Fig2,
        curves,
        notes,
    })
}

fn fig3(o: &Overrides) -> Result<FigurePlan, CliError> {
    o.restrict("fig3", &["a1", "n", "snr"])?;
    let absent: Vec<&str> = ["a1", "n"].into_iter().filter(|k| o.raw(k).is_none()).collect();
    if !absent.is_empty() {
        return Err(missing(
            Figure::Fig3,
            &absent,
            "fig3 has no published (a_1, a_2) pairs or element counts; pass e.g. a1=0.6,0.7,0.8 n=25,50",
        ));
    }
    let firsts = o.values("a1")?.unwrap_or_default();
    let elements = o.counts("n")?.unwrap_or_default();
    let snr = snr_axis(o, FIG3_SNR)?;
    let mut curves = Vec::new();
    for &a1 in &firsts {
        if !(a1 > 0.5 && a1 < 1.0) {
            return Err(CliError::usage("a1", format!("{a1} must lie in (0.5, 1) so that a_1 > a_2")));
        }
        for &n in &elements {
            let base = two_user_config(n, default_classical_distances())
                .with_first_power(a1)
                .map_err(|e| CliError::usage("a1", e.to_string()))?;
            for sic in [SicMode::Genie, SicMode::Detected] {
                let mut config = base.clone();
                config.system.sic = sic;
                let tag = match sic {
                    SicMode::Genie => "perfect",
                    SicMode::Detected => "imperfect",
                };
                curves.push(Curve {
                    name: format!("fig3_a{a1}_n{n}_{tag}"),
                    config,
                    spec: snr_spec(&snr, 2),
                });
            }
        }
    }
    Ok(FigurePlan {
        figure: Figure::Fig3,
        curves,
        notes: vec!["fig2 geometry and N_2 = N_1 assumed for fig3".to_string()],
    })
}

fn fig4(o: &Overrides) -> Result<FigurePlan, CliError> {
    o.restrict("fig4", &["a1", "elements", "snr"])?;
    let firsts = o.values("a1")?.unwrap_or_else(|| FIG4_FIRST_POWER.to_vec());
    let elements = match o.values("elements")? {
        Some(v) => v,
        None => parse_values(FIG4_ELEMENTS)?,
    };
    let snr_db = o.number("snr")?.unwrap_or(DEFAULT_FIXED_SNR_DB);
    let mut curves = Vec::new();
    for &a1 in &firsts {
        let config = two_user_config(1, default_classical_distances())
            .with_first_power(a1)
            .map_err(|e| CliError::usage("a1", e.to_string()))?;
        for user in 1..=2 {
            curves.push(Curve {
                name: format!("fig4_a{a1}_u{user}"),
                config: config.clone(),
                spec: SweepSpec {
                    axis: AxisKind::Elements,
                    values: elements.clone(),
                    users: vec![user],
                    fixed_snr_db: snr_db,
                },
            });
        }
    }
    let mut notes = vec!["fig2 geometry and N_2 = N_1 assumed for fig4".to_string()];
    if o.raw("a1").is_none() {
        notes.push(format!(
            "allocation pairs a_1 = {FIG4_FIRST_POWER:?}; only their 0.1 spacing is published for fig4"
        ));
    }
    Ok(FigurePlan {
        figure: Figure::Fig4,
        curves,
        notes,
    })
}

fn fig5(o: &Overrides) -> Result<FigurePlan, CliError> {
    o.restrict("fig5", &["n1", "n2", "n3", "snr"])?;
    let absent: Vec<&str> = ["n1", "n2", "n3"].into_iter().filter(|k| o.raw(k).is_none()).collect();
    if !absent.is_empty() {
        return Err(missing(
            Figure::Fig5,
            &absent,
            "fig5 has no published per-user element allocation; pass e.g. n1=20 n2=20 n3=20 \
             (comma lists of equal length give one curve set per position)",
        ));
    }
    let lists = [
        o.counts("n1")?.unwrap_or_default(),
        o.counts("n2")?.unwrap_or_default(),
        o.counts("n3")?.unwrap_or_default(),
    ];
    if lists[1].len() != lists[0].len() || lists[2].len() != lists[0].len() {
        return Err(CliError::usage("fig5", "n1, n2 and n3 must list the same number of values"));
    }
    let snr = snr_axis(o, FIG5_SNR)?;
    let mut curves = Vec::new();
    let [l1, l2, l3] = &lists;
    for ((&n1, &n2), &n3) in l1.iter().zip(l2).zip(l3) {
        let n = [n1, n2, n3];
        let config = three_user_config(n);
        for user in 1..=3 {
            curves.push(Curve {
                name: format!("fig5_n{}-{}-{}_u{user}", n[0], n[1], n[2]),
                config: config.clone(),
                spec: snr_spec(&snr, user),
            });
        }
    }
    Ok(FigurePlan {
        figure: Figure::Fig5,
        curves,
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Overrides {
        Overrides::default()
    }

    #[test]
    fn fig2_has_six_star_and_two_classical_curves() {
        let p = plan(Figure::Fig2, &none()).unwrap();
        assert_eq!(p.curves.len(), 8);
        let classical = p
            .curves
            .iter()
            .filter(|c| c.config.variant() == SystemVariant::ClassicalNoma)
            .count();
        assert_eq!(classical, 2);
        let mut names: Vec<_> = p.curves.iter().map(|c| c.name.clone()).collect();
        names.dedup();
        assert_eq!(names.len(), 8);
    }

    #[test]
    fn fig3_and_fig5_need_overrides() {
        let err = plan(Figure::Fig3, &none()).unwrap_err().to_string();
        assert!(err.contains("a1") && err.contains("n") && err.contains("fig3"), "{err}");
        let err = plan(Figure::Fig5, &Overrides::parse(["n1=10"]).unwrap()).unwrap_err().to_string();
        assert!(err.contains("n2, n3") && err.contains("fig5"), "{err}");
        let p = plan(Figure::Fig3, &Overrides::parse(["a1=0.6,0.8", "n=25"]).unwrap()).unwrap();
        assert_eq!(p.curves.len(), 4);
        let p = plan(Figure::Fig5, &Overrides::parse(["n1=10,20", "n2=10,20", "n3=10,20"]).unwrap()).unwrap();
        assert_eq!(p.curves.len(), 6);
    }

    #[test]
    fn fig4_default_pairs_differ_by_a_tenth() {
        let p = plan(Figure::Fig4, &none()).unwrap();
        let firsts: Vec<f64> = p.curves.iter().map(|c| c.config.users[0].power).collect();
        assert!((firsts[2] - firsts[0] - 0.1).abs() < 1e-12);
        assert!(p.curves.iter().all(|c| c.spec.axis == AxisKind::Elements && c.spec.fixed_snr_db == 40.0));
    }

    #[test]
    fn unknown_overrides_are_rejected() {
        assert!(plan(Figure::Fig2, &Overrides::parse(["n1=3"]).unwrap()).is_err());
        assert!(plan(Figure::Fig3, &Overrides::parse(["a1=0.4", "n=10"]).unwrap()).is_err());
        assert!(plan(Figure::Fig5, &Overrides::parse(["n1=1,2", "n2=1", "n3=1"]).unwrap()).is_err());
    }
}
