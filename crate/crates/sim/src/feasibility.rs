//! Properness counting for user-specified networks.

use ia_arrival::{properness_check, LinkDims, PropernessReport};

use crate::error::{SimError, SimResult};

/// Parses `MxN:d`, optionally prefixed by a repeat count as in `3*2x2:1`.
pub fn parse_users(spec: &str) -> SimResult<Vec<LinkDims>> {
    let bad = || {
        SimError::Config(format!(
            "cannot parse user {spec:?}; expected MxN:d or count*MxN:d"
        ))
    };
    let (count, dims) = match spec.split_once('*') {
        Some((c, rest)) => (c.trim().parse::<usize>().map_err(|_| bad())?, rest),
        None => (1, spec),
    };
    let (ant, d) = dims.split_once(':').ok_or_else(bad)?;
    let (m, n) = ant.split_once('x').ok_or_else(bad)?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let link = LinkDims::new(parse(m)?, parse(n)?, parse(d)?);
    Ok(vec![link; count])
}

/// Properness verdict and a readable table of the network.
pub fn feasibility_report(users: &[LinkDims]) -> SimResult<(PropernessReport, String)> {
    if users.is_empty() {
        return Err(SimError::Config("no users given".into()));
    }
    let report = properness_check(users);
    let mut text = String::from("user  M  N  d  variables\n");
    for (k, u) in users.iter().enumerate() {
        let vars = u.streams * (u.tx + u.rx).saturating_sub(2 * u.streams);
        text.push_str(&format!(
            "{k:>4} {:>2} {:>2} {:>2} {vars:>10}\n",
            u.tx, u.rx, u.streams
        ));
    }
    text.push_str(&format!("{report}\n"));
    Ok((report, text))
}
