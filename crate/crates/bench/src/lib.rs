//! Fixtures shared by the benchmarks in `benches/`.

use tshc_core::policy::init_params;
use tshc_core::reward::VvcConfig;
use tshc_core::tasks::{heading_grid, navigation_task};
use tshc_core::trainer::stream_rng;
use tshc_core::{Environment, MlpSpec, Normalization, ParamVector, Task, TshcConfig};

pub struct Fixture {
    pub spec: MlpSpec,
    pub theta: ParamVector,
    pub tasks: Vec<Task>,
    pub env: Environment,
    pub cfg: TshcConfig,
}

/// The 20 m navigation task with a 4-64-64-2 network at Ts = 0.1 s.
pub fn navigation() -> Fixture {
    let spec = MlpSpec::new([4, 64, 64, 2]).expect("valid spec");
    let theta = init_params(&spec, &mut stream_rng(7, 0, &[]));
    let mut env = Environment::default();
    env.vehicle.ts = 0.1;
    env.vvc = VvcConfig::spatial(5.0);
    Fixture {
        spec,
        theta,
        tasks: vec![navigation_task()],
        env,
        cfg: TshcConfig {
            t_max: 100,
            ..TshcConfig::default()
        },
    }
}

/// Ten headings with a 5-8-2 network at Ts = 0.01 s.
pub fn heading_grid_10() -> Fixture {
    let spec = MlpSpec::new([5, 8, 2]).expect("valid spec");
    let theta = init_params(&spec, &mut stream_rng(7, 0, &[]));
    let env = Environment {
        vvc: VvcConfig::constant_margin(5.0, 4.5 / 3.6),
        normalization: Normalization {
            dx: 0.25,
            dy: 0.25,
            ..Normalization::default()
        },
        ..Environment::default()
    };
    Fixture {
        spec,
        theta,
        tasks: heading_grid(10.0, 90.0).expect("valid grid"),
        env,
        cfg: TshcConfig {
            t_max: 2000,
            ..TshcConfig::default()
        },
    }
}
