//! The stopping-time event stream of one diffusion path — the alternating
//! F-entries `R_n` and V-exits `S_n` with their sites and locations — plus
//! a fixed little-endian binary record format for event dumps.

use std::io::{self, Read, Write};

use lsd_core::rng::StreamRng;

use crate::drift::DriftModel;
use crate::point::CoverPoint;
use crate::region::RegionSpec;
use crate::sim::{exit_ball, hit_region, Passage};

/// Where a path starts: a generic point (S_0 = 0) or exactly an orbit site
/// (S_0 is the first exit of that site's V-ball).
#[derive(Debug, Clone, Copy)]
pub enum LsStart {
    Point(CoverPoint),
    Site([i64; 3]),
}

impl LsStart {
    pub fn point(&self) -> CoverPoint {
        match self {
            LsStart::Point(p) => *p,
            LsStart::Site(s) => CoverPoint::at_site(*s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsEventKind {
    /// `R_n`: entered `F_{X_n}` at `Y_n`.
    EnterF,
    /// `S_n`: exited `V_{X_n}` at `Z_n`.
    ExitV,
}

#[derive(Debug, Clone, Copy)]
pub struct LsEvent {
    pub kind: LsEventKind,
    /// pair index `n >= 1`
    pub n: u32,
    /// global path time
    pub time: f64,
    /// the site `X_n`
    pub site: [i64; 3],
    /// `Y_n` (in `F`) or `Z_n` (snapped onto the V-sphere)
    pub point: CoverPoint,
}

/// One simulated path's event log, complete to the requested number of
/// (R, S) pairs or to the timeout.
#[derive(Debug, Clone)]
pub struct LsPath {
    pub path_id: u64,
    pub start: CoverPoint,
    /// time of `S_0` (0 unless the path started at a site)
    pub s0_time: f64,
    /// where the path stands at `S_0`
    pub s0_point: CoverPoint,
    pub events: Vec<LsEvent>,
    pub timed_out: bool,
}

impl LsPath {
    /// Stopping times must interlace: `S_0 <= R_1 <= S_1 <= R_2 <= ...`.
    pub fn times_are_monotone(&self) -> bool {
        let mut last = self.s0_time;
        for e in &self.events {
            if e.time < last {
                return false;
            }
            last = e.time;
        }
        true
    }
}

/// Simulates the event stream out to `max_pairs` (R, S) pairs. Each hit leg
/// runs to the model's `t_max` with one doubling retry; a timeout stops the
/// path and is flagged, never silently dropped.
pub fn simulate_ls_path(
    model: &DriftModel,
    r_f: f64,
    r_v: f64,
    start: LsStart,
    max_pairs: u32,
    path_id: u64,
    rng: &mut StreamRng,
) -> LsPath {
    let f_region = RegionSpec::orbit_balls(r_f);
    let start_point = start.point();
    let (s0_time, s0_point) = match start {
        LsStart::Point(p) => (0.0, p),
        LsStart::Site(site) => exit_ball(model, site, r_v, &CoverPoint::at_site(site), rng),
    };
    let mut path = LsPath {
        path_id,
        start: start_point,
        s0_time,
        s0_point,
        events: Vec::with_capacity(2 * max_pairs as usize),
        timed_out: false,
    };
    let mut cur = s0_point;
    let mut t = s0_time;
    for n in 1..=max_pairs {
        match hit_region(model, &f_region, &cur, model.t_max, rng) {
            Passage::Crossed { time, point, site } => {
                t += time;
                path.events.push(LsEvent {
                    kind: LsEventKind::EnterF,
                    n,
                    time: t,
                    site,
                    point,
                });
                let (dt_exit, z) = exit_ball(model, site, r_v, &point, rng);
                t += dt_exit;
                path.events.push(LsEvent {
                    kind: LsEventKind::ExitV,
                    n,
                    time: t,
                    site,
                    point: z,
                });
                cur = z;
            }
            Passage::TimedOut { .. } => {
                path.timed_out = true;
                break;
            }
        }
    }
    path
}

/// Packs a lattice site into one signed 64-bit index (21 bits + sign per
/// coordinate), the `site index` field of the binary event record.
pub fn pack_site(site: [i64; 3]) -> i64 {
    const OFF: i64 = 1 << 20;
    debug_assert!(site.iter().all(|c| c.abs() < OFF));
    (site[0] + OFF) | ((site[1] + OFF) << 21) | ((site[2] + OFF) << 42)
}

pub fn unpack_site(idx: i64) -> [i64; 3] {
    const OFF: i64 = 1 << 20;
    const MASK: i64 = (1 << 21) - 1;
    [
        (idx & MASK) - OFF,
        ((idx >> 21) & MASK) - OFF,
        ((idx >> 42) & MASK) - OFF,
    ]
}

/// Event tags of the binary record.
pub const TAG_START: u8 = 0;
pub const TAG_ENTER_F: u8 = 1;
pub const TAG_EXIT_V: u8 = 2;
pub const TAG_TIMEOUT: u8 = 3;

/// Writes one record: path id u64, tag u8, time f64, coords f64 x d,
/// site index i64 — all little-endian.
pub fn write_record<W: Write>(
    w: &mut W,
    d: usize,
    path_id: u64,
    tag: u8,
    time: f64,
    coords: &[f64; 3],
    site: [i64; 3],
) -> io::Result<()> {
    w.write_all(&path_id.to_le_bytes())?;
    w.write_all(&[tag])?;
    w.write_all(&time.to_le_bytes())?;
    for c in coords.iter().take(d) {
        w.write_all(&c.to_le_bytes())?;
    }
    w.write_all(&pack_site(site).to_le_bytes())?;
    Ok(())
}

/// One parsed record.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub path_id: u64,
    pub tag: u8,
    pub time: f64,
    pub coords: [f64; 3],
    pub site: [i64; 3],
}

pub fn read_records<R: Read>(r: &mut R, d: usize) -> io::Result<Vec<EventRecord>> {
    let mut out = Vec::new();
    let mut buf8 = [0u8; 8];
    let mut buf1 = [0u8; 1];
    loop {
        match r.read_exact(&mut buf8) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e),
        }
        let path_id = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf1)?;
        let tag = buf1[0];
        r.read_exact(&mut buf8)?;
        let time = f64::from_le_bytes(buf8);
        let mut coords = [0.0f64; 3];
        for c in coords.iter_mut().take(d) {
            r.read_exact(&mut buf8)?;
            *c = f64::from_le_bytes(buf8);
        }
        r.read_exact(&mut buf8)?;
        let site = unpack_site(i64::from_le_bytes(buf8));
        out.push(EventRecord {
            path_id,
            tag,
            time,
            coords,
            site,
        });
    }
    Ok(out)
}

/// Dumps a path's events in the binary format.
pub fn write_path<W: Write>(w: &mut W, d: usize, path: &LsPath) -> io::Result<()> {
    write_record(
        w,
        d,
        path.path_id,
        TAG_START,
        0.0,
        &path.start.position(d),
        path.start.nearest_site(d),
    )?;
    for e in &path.events {
        let tag = match e.kind {
            LsEventKind::EnterF => TAG_ENTER_F,
            LsEventKind::ExitV => TAG_EXIT_V,
        };
        write_record(w, d, path.path_id, tag, e.time, &e.point.position(d), e.site)?;
    }
    if path.timed_out {
        let last = path
            .events
            .last()
            .map(|e| e.point)
            .unwrap_or(path.s0_point);
        write_record(
            w,
            d,
            path.path_id,
            TAG_TIMEOUT,
            f64::NAN,
            &last.position(d),
            last.nearest_site(d),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::rng::RngLineage;

    #[test]
    fn event_times_interlace() {
        let model = DriftModel::brownian(1, 1e-3, 50.0);
        let lineage = RngLineage::new(5);
        for id in 0..20u64 {
            let p = simulate_ls_path(
                &model,
                0.1,
                0.3,
                LsStart::Point(CoverPoint::new(1, &[0.5])),
                4,
                id,
                &mut lineage.stream(id),
            );
            assert!(p.times_are_monotone());
            assert!(!p.timed_out);
            // events alternate EnterF / ExitV with matching sites
            for pair in p.events.chunks(2) {
                assert_eq!(pair[0].kind, LsEventKind::EnterF);
                assert_eq!(pair[1].kind, LsEventKind::ExitV);
                assert_eq!(pair[0].site, pair[1].site);
                // Y_n in F, Z_n on the V-sphere
                assert!(pair[0].point.dist_to_site(pair[0].site, 1) <= 0.1 + 1e-9);
                assert!((pair[1].point.dist_to_site(pair[1].site, 1) - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn site_start_exits_before_first_entry() {
        let model = DriftModel::brownian(2, 1e-3, 50.0);
        let mut rng = RngLineage::new(6).stream(0);
        let p = simulate_ls_path(&model, 0.1, 0.3, LsStart::Site([2, -1, 0]), 2, 0, &mut rng);
        assert!(p.s0_time > 0.0);
        assert!((p.s0_point.dist_to_site([2, -1, 0], 2) - 0.3).abs() < 1e-12);
        if let Some(first) = p.events.first() {
            assert!(first.time >= p.s0_time);
        }
    }

    #[test]
    fn pack_unpack_site_round_trip() {
        for site in [[0, 0, 0], [5, -3, 2], [-1000, 999, -1]] {
            assert_eq!(unpack_site(pack_site(site)), site);
        }
    }

    #[test]
    fn binary_records_round_trip() {
        let model = DriftModel::brownian(2, 1e-3, 50.0);
        let mut rng = RngLineage::new(7).stream(1);
        let p = simulate_ls_path(
            &model,
            0.1,
            0.3,
            LsStart::Point(CoverPoint::new(2, &[0.5, 0.5])),
            3,
            42,
            &mut rng,
        );
        let mut buf = Vec::new();
        write_path(&mut buf, 2, &p).unwrap();
        let records = read_records(&mut buf.as_slice(), 2).unwrap();
        assert_eq!(records.len(), 1 + p.events.len());
        assert_eq!(records[0].tag, TAG_START);
        assert!(records.iter().all(|r| r.path_id == 42));
        let entry = &records[1];
        assert_eq!(entry.tag, TAG_ENTER_F);
        assert_eq!(entry.site, p.events[0].site);
        assert!((entry.time - p.events[0].time).abs() < 1e-15);
    }
}
