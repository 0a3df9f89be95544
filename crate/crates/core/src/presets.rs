//! Named build configurations for the single-pair and multi-parallel
//! setups: window, curriculum, prefix+suffix and masking variants of POSE,
//! plus ParSE and MiPS data mixes.

use alloc::vec::Vec;

use crate::builder::{BuildConfig, Reform, Task};
use crate::schedule::ScheduleKind;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: BuildConfig,
}

/// Single-pair setup: 10k steps of 512 pairs, 256-unit inputs.
fn single_pair(reform: Reform, schedule: ScheduleKind) -> BuildConfig {
    BuildConfig {
        task: Task::Bilingual,
        reform,
        schedule,
        n_train: 10_000 * 512,
        n_valid: 5_000,
        n_test: 5_000,
        max_len: 256,
        batch_size: 512,
        ..BuildConfig::default()
    }
}

/// Multi-parallel setup: 20M sampled pairs, 2048 per step, halved while a
/// parallel scaffold is in play.
fn multi_parallel(reform: Reform) -> BuildConfig {
    BuildConfig {
        task: Task::Multiparallel,
        reform,
        schedule: ScheduleKind::Mix { p: 0.8 },
        n_train: 20_000_000,
        n_valid: 5_000,
        n_test: 10_000,
        max_len: 256,
        batch_size: 2048,
        halve_batch: true,
        pivot: (reform == Reform::Parse).then(|| "eng_Latn".into()),
        ..BuildConfig::default()
    }
}

/// Mask windows 1-4: (start, end, p, span).
pub const MASK_WINDOWS: [(f64, f64, f64, bool); 4] = [
    (0.0, 0.2, 0.1, false),
    (0.8, 1.0, 0.1, false),
    (0.5, 1.0, 0.25, false),
    (0.5, 1.0, 0.25, true),
];

pub const DEFAULT_MEAN_SPAN: u32 = 3;

pub fn mask_schedule(which: usize) -> ScheduleKind {
    let (start_frac, end_frac, p, span) = MASK_WINDOWS[which - 1];
    ScheduleKind::MaskWindow {
        start_frac,
        end_frac,
        p,
        span,
        mean_span: DEFAULT_MEAN_SPAN,
    }
}

pub fn all() -> Vec<Preset> {
    let ps = Reform::PrefixSuffix { prefix_share: 0.5 };
    let window = |frac| ScheduleKind::WindowFirst { frac };
    let mut out = alloc::vec![
        Preset {
            name: "baseline",
            description: "direct translation pairs, no reformulation",
            config: single_pair(Reform::None, window(0.0)),
        },
        Preset {
            name: "pose_20pct",
            description: "POSE on every example of the first 20% of steps, uniform prefix length",
            config: single_pair(Reform::Pose, window(0.2)),
        },
        Preset {
            name: "prefix_suffix_12",
            description: "prefix+suffix scaffold on the first 12% of steps",
            config: single_pair(ps, window(0.12)),
        },
        Preset {
            name: "prefix_suffix_20",
            description: "prefix+suffix scaffold on the first 20% of steps",
            config: single_pair(ps, window(0.2)),
        },
        Preset {
            name: "prefix_suffix_40",
            description: "prefix+suffix scaffold on the first 40% of steps",
            config: single_pair(ps, window(0.4)),
        },
        Preset {
            name: "curriculum1",
            description: "POSE on every step, scaffold fraction decays 100% -> 0% over training",
            config: single_pair(Reform::Pose, ScheduleKind::Curriculum1),
        },
        Preset {
            name: "curriculum2",
            description: "POSE on 80% for 20% of steps, 80% -> 40% until 60%, then none",
            config: single_pair(Reform::Pose, ScheduleKind::Curriculum2),
        },
        Preset {
            name: "curriculum3",
            description: "POSE on the first 20% of steps, scaffold fraction decays 100% -> 0%",
            config: single_pair(Reform::Pose, ScheduleKind::Curriculum3),
        },
    ];
    let mask_desc = [
        "token masking p=0.1 in the first 20% of steps",
        "token masking p=0.1 in the last 20% of steps",
        "token masking p=0.25 in the last 50% of steps",
        "span masking p=0.25 in the last 50% of steps",
    ];
    let mask_names = ["mask1", "mask2", "mask3", "mask4"];
    for i in 0..4 {
        out.push(Preset {
            name: mask_names[i],
            description: mask_desc[i],
            config: single_pair(Reform::Mask, mask_schedule(i + 1)),
        });
    }
    out.push(Preset {
        name: "parse_mix80",
        description: "20% baseline / 80% ParSE with an English pivot, batch halved",
        config: multi_parallel(Reform::Parse),
    });
    out.push(Preset {
        name: "mips_mix80",
        description: "20% baseline / 80% MiPS, batch halved",
        config: multi_parallel(Reform::Mips),
    });
    out
}

pub fn get(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::batch_plan;

    #[test]
    fn every_preset_validates() {
        let all = all();
        assert_eq!(all.len(), 14);
        for p in &all {
            p.config
                .validate()
                .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        let mut names: Vec<_> = all.iter().map(|p| p.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 14);
    }

    #[test]
    fn parse_mix80() {
        let c = get("parse_mix80").unwrap().config;
        assert_eq!(c.schedule, ScheduleKind::Mix { p: 0.8 });
        assert!(c.halve_batch);
        assert_eq!(batch_plan(&c, true, None).unwrap().examples_per_step, 1024);
    }

    #[test]
    fn mask4() {
        let c = get("mask4").unwrap().config;
        assert_eq!(
            c.schedule,
            ScheduleKind::MaskWindow {
                start_frac: 0.5,
                end_frac: 1.0,
                p: 0.25,
                span: true,
                mean_span: 3
            }
        );
        assert_eq!(c.reform, Reform::Mask);
    }

    #[test]
    fn pose_keeps_full_batch() {
        let c = get("pose_20pct").unwrap().config;
        assert_eq!(batch_plan(&c, true, None).unwrap().examples_per_step, 512);
        assert_eq!(c.total_steps().unwrap(), 10_000);
    }
}
