//! `phantom`: synthetic cohort generation.

use lesionmetrics::phantom::{generate_cohort, CohortParams, Manifest};

use crate::args::PhantomArgs;
use crate::error::{CmdResult, CommandError};
use crate::format::parse_list;

fn triple<T: Copy>(s: &str, flag: &str, conv: impl Fn(f64) -> Option<T>) -> CmdResult<[T; 3]> {
    let bad = || CommandError::Config(format!("--{flag} expects one or three values, got {s:?}"));
    let values = parse_list(s).map_err(|_| bad())?;
    let values: Vec<T> = values.into_iter().map(&conv).collect::<Option<_>>().ok_or_else(bad)?;
    match values.as_slice() {
        [v] => Ok([*v; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(bad()),
    }
}

pub fn params_from_args(args: &PhantomArgs) -> CmdResult<CohortParams> {
    let dims = triple(&args.dims, "dims", |v| (v >= 1.0 && v.fract() == 0.0).then_some(v as usize))?;
    let spacing = triple(&args.spacing, "spacing", Some)?;
    let offset: Vec<f64> = parse_list(&args.offset_mm).map_err(CommandError::Config)?;
    let offset_mm: [f64; 3] = offset.try_into().map_err(|_| CommandError::Config("--offset-mm expects three values".into()))?;
    Ok(CohortParams {
        n_positive: args.n_positive,
        n_negative: args.n_negative,
        n_lesions: args.n_lesions,
        diameter_range_mm: [args.diameter_min_mm, args.diameter_max_mm],
        dims,
        spacing,
        n_missed: args.n_missed,
        miss_below_mm: args.miss_below_mm,
        n_false_positives: args.n_false_positives,
        fp_diameter_range_mm: [args.fp_diameter_min_mm, args.fp_diameter_max_mm],
        morph_steps: args.morph_steps,
        offset_mm,
        seed: args.seed,
    })
}

pub fn run_phantom(args: &PhantomArgs) -> CmdResult<Manifest> {
    let params = params_from_args(args)?;
    generate_cohort(&params, &args.out_dir).map_err(|e| match e {
        lesionmetrics::Error::Phantom(m) | lesionmetrics::Error::InvalidGrid(m) => CommandError::Config(m),
        other => other.into(),
    })
}
