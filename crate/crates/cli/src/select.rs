//! Parsers for the command-line selector grammars.

use polar_mi::dirstats::CircularDistribution;
use polar_mi::inputs::InputSpec;

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number<T: std::str::FromStr>(token: &str, what: &str) -> Result<T, CliError> {
    token
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad {what} '{token}'")))
}

/// Parses `gaussian | halfgauss | ook | psk:M | askpsk:A,M[,offset] |
/// qam:M | rings:R` into an input of unit power.
pub fn parse_input(s: &str) -> Result<InputSpec, CliError> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let need = |what: &str| arg.ok_or_else(|| usage(format!("input '{name}' needs :{what}")));
    let built = match name {
        "gaussian" | "halfgauss" | "ook" if arg.is_some() => {
            return Err(usage(format!(
                "input '{name}' takes no argument, got '{s}'"
            )))
        }
        "gaussian" => InputSpec::gaussian(1.0),
        "halfgauss" => InputSpec::half_gaussian(1.0),
        "ook" => InputSpec::ook(1.0),
        "psk" => InputSpec::psk(number(need("M")?, "PSK order")?, 1.0),
        "qam" => InputSpec::qam(number(need("M")?, "QAM order")?, 1.0),
        "rings" => InputSpec::rings(number(need("R")?, "ring count")?, 1.0),
        "askpsk" => {
            let parts: Vec<&str> = need("A,M[,offset]")?.split(',').collect();
            let offset = match parts.get(2).copied() {
                None => false,
                Some("offset") => true,
                Some(other) => return Err(usage(format!("bad askpsk flag '{other}'"))),
            };
            if parts.len() < 2 || parts.len() > 3 {
                return Err(usage(format!("askpsk needs A,M[,offset], got '{s}'")));
            }
            InputSpec::ask_psk(
                number(parts[0], "ASK levels")?,
                number(parts[1], "PSK order")?,
                1.0,
                offset,
            )
        }
        other => return Err(usage(format!("unknown input '{other}'"))),
    };
    built.map_err(|e| usage(format!("input '{s}': {e}")))
}

/// Parses `wrapped-gaussian:SIGMA | von-mises:KAPPA | uniform | none`.
pub fn parse_phase_noise(s: &str) -> Result<Option<CircularDistribution>, CliError> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let param = |what: &str| -> Result<f64, CliError> {
        number(
            arg.ok_or_else(|| usage(format!("phase noise '{name}' needs :{what}")))?,
            what,
        )
    };
    let d = match name {
        "none" if arg.is_none() => return Ok(None),
        "uniform" if arg.is_none() => Ok(CircularDistribution::Uniform),
        "wrapped-gaussian" => CircularDistribution::wrapped_gaussian(0.0, param("SIGMA")?),
        "von-mises" => CircularDistribution::von_mises(0.0, param("KAPPA")?),
        _ => return Err(usage(format!("unknown phase noise '{s}'"))),
    };
    d.map(Some)
        .map_err(|e| usage(format!("phase noise '{s}': {e}")))
}

/// Like [`parse_phase_noise`], plus `truncated-gaussian:SIGMA`, for the
/// directional-statistics report.
pub fn parse_distribution(s: &str) -> Result<CircularDistribution, CliError> {
    if let Some(arg) = s.strip_prefix("truncated-gaussian:") {
        return CircularDistribution::truncated_gaussian(0.0, number(arg, "SIGMA")?)
            .map_err(|e| usage(format!("distribution '{s}': {e}")));
    }
    parse_phase_noise(s)?.ok_or_else(|| usage("distribution 'none' has nothing to report"))
}

/// Parses `start:stop:step` into the grid `start, start + step, ...` up to
/// `stop` inclusive.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("range must be start:stop:step, got '{s}'")));
    }
    let start: f64 = number(parts[0], "range start")?;
    let stop: f64 = number(parts[1], "range stop")?;
    let step: f64 = number(parts[2], "range step")?;
    if !start.is_finite() || !stop.is_finite() || start > stop {
        return Err(usage(format!(
            "range needs finite start <= stop, got '{s}'"
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(usage(format!("range step must be > 0, got '{s}'")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(usage(format!("range '{s}' has too many points")));
    }
    // multiply rather than accumulate so grid values do not drift
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
