//! Named experiment presets reproducing the model-problem studies.

use crate::integrators::Scheme;
use crate::sim::config::RunConfig;

/// What a preset executes.
#[derive(Clone, Debug, PartialEq)]
pub enum PresetKind {
    /// Independent runs, one diagnostics CSV each.
    Runs(Vec<RunConfig>),
    /// Temporal convergence studies over a halving chain.
    Convergence(Vec<(RunConfig, Vec<f64>)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: PresetKind,
}

fn cfg(prefix: &str, scheme: Scheme, n: usize, mu: f64, dt: f64, t_end: f64) -> RunConfig {
    RunConfig { name: format!("{prefix}_{scheme}_dt{dt}"), scheme, n, dt, t_end, mu, ..RunConfig::default() }
}

fn runs(prefix: &str, schemes: &[Scheme], dts: &[f64], n: usize, mu: f64, t_end: f64) -> Vec<RunConfig> {
    dts.iter().flat_map(|&dt| schemes.iter().map(move |&s| cfg(prefix, s, n, mu, dt, t_end))).collect()
}

/// Halving chain used by the convergence presets.
pub const CONVERGENCE_DTS: [f64; 4] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

pub fn presets() -> Vec<Preset> {
    use Scheme::*;
    let conv = |n: usize, mu: f64| {
        let mut c = cfg("conv-fig7-table3", SecondOrderUnsteady, n, mu, CONVERGENCE_DTS[0], 1.0);
        c.name = format!("conv-fig7-table3_mu{mu}_N{n}");
        (c, CONVERGENCE_DTS.to_vec())
    };
    vec![
        Preset {
            name: "steady-fig1",
            description: "steady flow energy of four schemes at dt 0.1 and 1 (N=128, S_b=mu=1)",
            kind: PresetKind::Runs(runs(
                "steady-fig1",
                &[ExplicitSteady, Ssd1Steady, Ifrk4Steady, StableSteady],
                &[0.1, 1.0],
                128,
                1.0,
                20.0,
            )),
        },
        Preset {
            name: "steady-fig2",
            description: "steady flow energy of ssd1 and ifrk4 at dt 10 for 20 steps",
            kind: PresetKind::Runs(runs("steady-fig2", &[Ssd1Steady, Ifrk4Steady], &[10.0], 128, 1.0, 200.0)),
        },
        Preset {
            name: "steady-fig3",
            description: "final interface of ssd1 and ifrk4 after 20 steps at dt 10 (snapshots)",
            kind: PresetKind::Runs(runs("steady-fig3", &[Ssd1Steady, Ifrk4Steady], &[10.0], 128, 1.0, 200.0)),
        },
        Preset {
            name: "unsteady-fig4",
            description: "unsteady flow energy of explicit, ssd1 and stable schemes at dt 0.005 and 0.05 (mu=0.01)",
            kind: PresetKind::Runs(runs(
                "unsteady-fig4",
                &[ExplicitUnsteady, Ssd1Unsteady, StableUnsteady],
                &[0.005, 0.05],
                128,
                0.01,
                2.0,
            )),
        },
        Preset {
            name: "unsteady-fig5",
            description: "unsteady flow energy of ssd1 and stable schemes at dt 1 (mu=0.01)",
            kind: PresetKind::Runs(runs("unsteady-fig5", &[Ssd1Unsteady, StableUnsteady], &[1.0], 128, 0.01, 20.0)),
        },
        Preset {
            name: "unsteady-fig6",
            description: "final interface of ssd1 and stable schemes after 20 steps at dt 1 (snapshots)",
            kind: PresetKind::Runs(runs("unsteady-fig6", &[Ssd1Unsteady, StableUnsteady], &[1.0], 128, 0.01, 20.0)),
        },
        Preset {
            name: "conv-fig7-table3",
            description: "second-order temporal convergence at T=1, N=256 for mu 0.05 and 0.01, N=512 for mu 0.005",
            kind: PresetKind::Convergence(vec![conv(256, 0.05), conv(256, 0.01), conv(512, 0.005)]),
        },
        Preset {
            name: "stab-fig8",
            description: "energy of the second-order implicit and explicit schemes at dt 0.002 and 0.02 (mu=0.01)",
            kind: PresetKind::Runs(runs(
                "stab-fig8",
                &[SecondOrderUnsteady, SecondOrderExplicitUnsteady],
                &[0.002, 0.02],
                128,
                0.01,
                1.0,
            )),
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        let ps = presets();
        assert_eq!(ps.len(), 8);
        for p in ps {
            let configs: Vec<RunConfig> = match p.kind {
                PresetKind::Runs(r) => r,
                PresetKind::Convergence(c) => c.into_iter().map(|(c, _)| c).collect(),
            };
            assert!(!configs.is_empty());
            for c in configs {
                c.validate().unwrap();
                assert!(c.name.starts_with(p.name));
            }
        }
    }

    #[test]
    fn fig1_covers_four_schemes_and_two_steps() {
        let Some(Preset { kind: PresetKind::Runs(r), .. }) = preset("steady-fig1") else { panic!() };
        assert_eq!(r.len(), 8);
        assert!(preset("nope").is_none());
    }
}
