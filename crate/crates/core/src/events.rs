//! Plain-text event store: `#`-prefixed header lines carrying the config hash,
//! seed and phases, then one `shot_id,vx,vy,vz,phase_index` record per detection
//! (velocities in mm/s).

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulate::{Campaign, DetectionEvent, PhaseRun};

const MAGIC: &str = "# twinhalo event store v1";
const COLUMNS: &str = "shot_id,vx,vy,vz,phase_index";

pub fn write_store<W: Write>(campaign: &Campaign, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let shots = campaign.runs.first().map_or(0, |r| r.shots.len());
    if campaign.runs.iter().any(|r| r.shots.len() != shots) {
        return Err(Error::MalformedStore("all phases must have the same number of shots".into()));
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "# config_hash: {}", campaign.config_hash)?;
    writeln!(w, "# seed: {}", campaign.seed)?;
    writeln!(w, "# shots_per_phase: {shots}")?;
    let phases: Vec<String> = campaign.runs.iter().map(|r| format!("{}", r.phase)).collect();
    writeln!(w, "# phases: {}", phases.join(","))?;
    writeln!(w, "{COLUMNS}")?;
    for (pi, run) in campaign.runs.iter().enumerate() {
        for (s, shot) in run.shots.iter().enumerate() {
            for e in shot {
                debug_assert_eq!(e.shot_id as usize, s);
                let [x, y, z] = e.velocity;
                writeln!(w, "{s},{x:.4},{y:.4},{z:.4},{pi}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_store(campaign: &Campaign, path: impl AsRef<Path>) -> Result<()> {
    write_store(campaign, std::fs::File::create(path)?)
}

pub fn load_store(path: impl AsRef<Path>) -> Result<Campaign> {
    read_store(std::fs::File::open(path)?)
}

pub fn read_store<R: Read>(input: R) -> Result<Campaign> {
    let bad = |line: usize, msg: String| Error::MalformedStore(format!("line {line}: {msg}"));
    let mut lines = BufReader::new(input).lines();
    let mut next_line = |n: usize| -> Result<String> {
        lines.next().ok_or_else(|| bad(n, "unexpected end of header".into()))?.map_err(Error::from)
    };
    if next_line(1)?.trim_end() != MAGIC {
        return Err(bad(1, "not a twinhalo event store".into()));
    }
    let mut field = |n: usize, key: &str| -> Result<String> {
        let line = next_line(n)?;
        let prefix = format!("# {key}: ");
        line.strip_prefix(&prefix).map(|v| v.trim().to_owned()).ok_or_else(|| bad(n, format!("expected '{prefix}'")))
    };
    let config_hash = field(2, "config_hash")?;
    let seed: u64 = field(3, "seed")?.parse().map_err(|e| bad(3, format!("{e}")))?;
    let shots: usize = field(4, "shots_per_phase")?.parse().map_err(|e| bad(4, format!("{e}")))?;
    let phases_text = field(5, "phases")?;
    let phases: Vec<f64> = if phases_text.is_empty() {
        Vec::new()
    } else {
        phases_text
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(5, format!("phase '{p}': {e}"))))
            .collect::<Result<_>>()?
    };
    if next_line(6)?.trim_end() != COLUMNS {
        return Err(bad(6, format!("expected column header '{COLUMNS}'")));
    }
    let mut runs: Vec<PhaseRun> =
        phases.iter().map(|&phase| PhaseRun { phase, shots: vec![Vec::new(); shots] }).collect();
    for (i, line) in lines.enumerate() {
        let n = i + 7;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(bad(n, format!("expected 5 fields, found {}", parts.len())));
        }
        let shot: u32 = parts[0].trim().parse().map_err(|e| bad(n, format!("shot_id: {e}")))?;
        let mut v = [0.0f64; 3];
        for d in 0..3 {
            v[d] = parts[d + 1].trim().parse().map_err(|e| bad(n, format!("velocity: {e}")))?;
            if !v[d].is_finite() {
                return Err(bad(n, "non-finite velocity".into()));
            }
        }
        let pi: usize = parts[4].trim().parse().map_err(|e| bad(n, format!("phase_index: {e}")))?;
        let run = runs.get_mut(pi).ok_or_else(|| bad(n, format!("phase_index {pi} out of range")))?;
        let slot = run
            .shots
            .get_mut(shot as usize)
            .ok_or_else(|| bad(n, format!("shot_id {shot} exceeds shots_per_phase")))?;
        slot.push(DetectionEvent { shot_id: shot, velocity: v, port: None });
    }
    Ok(Campaign { config_hash, seed, runs })
}
