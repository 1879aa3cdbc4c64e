use drive_irl::ingest::LengthUnit;
use drive_irl::synthetic::{generate_traffic, write_ngsim_csv, TrafficSpec};

use crate::config::RunConfig;
use crate::output::write_atomic;
use crate::SynthArgs;

pub fn run(args: SynthArgs, cfg: RunConfig) -> anyhow::Result<()> {
    let spec = TrafficSpec {
        lanes: args.lanes,
        vehicles_per_lane: args.vehicles_per_lane,
        duration: args.duration,
        ..TrafficSpec::default()
    };
    let rows = generate_traffic(&spec, cfg.seed)?;
    let feet = args.unit.unwrap_or(cfg.unit) == LengthUnit::Feet;
    write_atomic(&args.out, |buf| write_ngsim_csv(buf, &rows, feet))
}
