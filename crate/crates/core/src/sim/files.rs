//! Layout file, simulator settings file and trace export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Layout, SchedulerKind, SimError, SimResult};

/// Parses a layout file (`fabric <area>`, one `prr <size>` per region,
/// optional `gpp <count>`) into the layout and the GPP count.
pub fn parse_layout_file(text: &str) -> Result<(Layout, u32), SimError> {
    let mut fabric = None;
    let mut prrs = Vec::new();
    let mut gpp = 0u32;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let syntax = |message: String| SimError::Syntax {
            line: lineno + 1,
            message,
        };
        let [key, value] = fields[..] else {
            return Err(syntax("expected `<keyword> <integer>`".into()));
        };
        let value: u64 = value
            .parse()
            .map_err(|_| syntax(format!("expected an integer, found `{value}`")))?;
        match key {
            "fabric" => fabric = Some(value),
            "prr" => prrs.push(value),
            "gpp" => gpp = u32::try_from(value).map_err(|_| syntax("gpp count too large".into()))?,
            other => return Err(syntax(format!("unknown keyword `{other}`"))),
        }
    }
    let fabric = fabric.ok_or(SimError::Syntax {
        line: 1,
        message: "missing `fabric <area>` line".into(),
    })?;
    Ok((Layout::new(fabric, prrs)?, gpp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSettings {
    pub scheduler: SchedulerKind,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            scheduler: SchedulerKind::Reuse,
            seed: 0,
        }
    }
}

/// Parses `key=value` simulator settings (`scheduler=S2`, `seed=7`).
/// Unknown keys are rejected.
pub fn parse_sim_settings(text: &str) -> Result<SimSettings, SimError> {
    let mut settings = SimSettings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| SimError::Syntax {
            line: lineno + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected `key=value`".into()))?;
        let value = value.trim();
        match key.trim() {
            "scheduler" => settings.scheduler = value.parse().map_err(syntax)?,
            "seed" => {
                settings.seed = value
                    .parse()
                    .map_err(|_| syntax(format!("expected an integer seed, found `{value}`")))?
            }
            other => return Err(syntax(format!("unknown setting `{other}`"))),
        }
    }
    Ok(settings)
}

/// One placement per line: `node resource reconfig_start exec_start finish`,
/// with `-` when the task did not reconfigure.
pub fn export_trace(result: &SimResult) -> String {
    let mut out = String::from("node resource reconfig_start exec_start finish\n");
    for p in &result.schedule {
        let rs = p.reconfig_start.map_or_else(|| "-".to_string(), |s| s.to_string());
        let _ = writeln!(out, "{} {} {} {} {}", p.node, p.resource, rs, p.exec_start, p.finish);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ShapeTag;

    #[test]
    fn layout_file() {
        let (l, gpp) = parse_layout_file("# demo\nfabric 100\nprr 40\nprr 60\ngpp 2\n").unwrap();
        assert_eq!(l.prr_sizes, vec![40, 60]);
        assert_eq!(l.shape, ShapeTag::Skewed);
        assert_eq!(gpp, 2);
        assert!(parse_layout_file("prr 10\n").is_err());
        assert!(parse_layout_file("fabric 10\nprr 20\n").is_err());
        assert!(matches!(
            parse_layout_file("fabric 10\nslot 2\n"),
            Err(SimError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn settings_file() {
        let s = parse_sim_settings("scheduler=S3\nseed = 42\n").unwrap();
        assert_eq!(s.scheduler, SchedulerKind::ReuseMigrate);
        assert_eq!(s.seed, 42);
        assert!(parse_sim_settings("scheduler=S9").is_err());
        assert!(parse_sim_settings("colour=blue").is_err());
    }
}
