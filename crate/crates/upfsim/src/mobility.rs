//! Streaming reader for vehicular mobility traces.
//!
//! The trace is line-oriented "time vehicle_id x y speed" text ordered by
//! non-decreasing time (the Cologne koln.tr layout). It is consumed in a
//! single pass; memory stays bounded by one slot's worth of vehicles no matter
//! how large the file is. Vehicles with no entry in a slot window are off for
//! that slot.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Dense intern index for a vehicle id token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UeId(pub u32);

/// One record of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub time: f64,
    pub vehicle_id: String,
    pub x: f64,
    pub y: f64,
    pub speed: f64,
}

/// Parses a single trace line ("time vehicle_id x y speed").
pub fn parse_trace_line(line: &str, line_no: usize) -> Result<TraceEntry> {
    let mut fields = line.split_whitespace();
    let mut next = |name: &str| {
        fields
            .next()
            .ok_or_else(|| Error::parse(line_no, format!("missing field '{name}'")))
    };
    let time = parse_num(next("time")?, "time", line_no)?;
    let vehicle_id = next("vehicle_id")?.to_string();
    let x = parse_num(next("x")?, "x", line_no)?;
    let y = parse_num(next("y")?, "y", line_no)?;
    let speed = parse_num(next("speed")?, "speed", line_no)?;
    if time < 0.0 {
        return Err(Error::parse(line_no, format!("negative timestamp {time}")));
    }
    Ok(TraceEntry {
        time,
        vehicle_id,
        x,
        y,
        speed,
    })
}

fn parse_num(field: &str, name: &str, line_no: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line_no, format!("cannot parse {name} '{field}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(line_no, format!("non-finite {name} '{field}'")));
    }
    Ok(v)
}

/// The set of UEs active during one slot window, with the freshest known
/// position of each (its latest entry in the window; ties go to the last
/// occurrence in file order).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlotSnapshot {
    /// Window index: slot i covers [i*delta, (i+1)*delta) in trace time.
    pub slot_index: u64,
    /// Sorted by UE id; each UE appears at most once.
    pub active_ues: Vec<(UeId, (f64, f64))>,
}

impl TimeSlotSnapshot {
    pub fn is_empty(&self) -> bool {
        self.active_ues.is_empty()
    }
}

#[derive(Default)]
struct Interner {
    map: HashMap<Box<str>, u32>,
    count: u32,
}

impl Interner {
    fn resolve(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.map.get(token) {
            return id;
        }
        let id = self.count;
        self.map.insert(Box::from(token), id);
        self.count += 1;
        id
    }
}

/// Single-pass iterator over per-slot snapshots.
///
/// Slots are indexed by floor(time / slot_duration); the stream starts at the
/// first entry's slot and emits every subsequent slot in order, including
/// empty ones, until the trace ends. Timestamps may step backwards by at most
/// `time_tolerance` seconds (such entries land in the slot being accumulated);
/// larger regressions are an error naming the offending line.
pub struct SlotStream<R: BufRead> {
    reader: R,
    slot_duration: f64,
    time_tolerance: f64,
    interner: Interner,
    line_no: usize,
    max_time: f64,
    /// Slot currently being accumulated, if any.
    current_slot: Option<u64>,
    /// UE id -> (x, y, timestamp of freshest entry seen in the window).
    window: HashMap<u32, (f64, f64, f64)>,
    /// Slots finished but not yet handed out (data slot plus any empty gap).
    ready: std::collections::VecDeque<TimeSlotSnapshot>,
    done: bool,
}

impl<R: BufRead> SlotStream<R> {
    pub fn new(reader: R, slot_duration: f64) -> Result<Self> {
        Self::with_tolerance(reader, slot_duration, 0.0)
    }

    pub fn with_tolerance(reader: R, slot_duration: f64, time_tolerance: f64) -> Result<Self> {
        if slot_duration <= 0.0 {
            return Err(Error::invalid(format!(
                "slot duration {slot_duration} must be > 0"
            )));
        }
        if time_tolerance < 0.0 {
            return Err(Error::invalid("time tolerance must be >= 0"));
        }
        Ok(SlotStream {
            reader,
            slot_duration,
            time_tolerance,
            interner: Interner::default(),
            line_no: 0,
            max_time: 0.0,
            current_slot: None,
            window: HashMap::new(),
            ready: std::collections::VecDeque::new(),
            done: false,
        })
    }

    /// Number of distinct vehicle ids seen so far.
    pub fn distinct_vehicles(&self) -> u32 {
        self.interner.count
    }

    fn seal_window(&mut self) {
        let slot_index = match self.current_slot {
            Some(s) => s,
            None => return,
        };
        let mut active: Vec<(UeId, (f64, f64))> = self
            .window
            .drain()
            .map(|(ue, (x, y, _t))| (UeId(ue), (x, y)))
            .collect();
        active.sort_unstable_by_key(|(ue, _)| *ue);
        self.ready.push_back(TimeSlotSnapshot {
            slot_index,
            active_ues: active,
        });
    }

    fn ingest_line(&mut self, line: &str) -> Result<()> {
        if line.trim().is_empty() {
            return Ok(());
        }
        let entry = parse_trace_line(line, self.line_no)?;
        if entry.time < self.max_time && self.max_time - entry.time > self.time_tolerance {
            return Err(Error::parse(
                self.line_no,
                format!(
                    "timestamp {} out of order (seen {} already, tolerance {})",
                    entry.time, self.max_time, self.time_tolerance
                ),
            ));
        }
        self.max_time = self.max_time.max(entry.time);
        let slot = (entry.time / self.slot_duration).floor() as u64;
        match self.current_slot {
            None => self.current_slot = Some(slot),
            Some(current) if slot > current => {
                self.seal_window();
                // emit empty snapshots for slots with no entries at all
                for gap in (current + 1)..slot {
                    self.ready.push_back(TimeSlotSnapshot {
                        slot_index: gap,
                        active_ues: Vec::new(),
                    });
                }
                self.current_slot = Some(slot);
            }
            // slot <= current: tolerated stragglers stay in the open window
            Some(_) => {}
        }
        let ue = self.interner.resolve(&entry.vehicle_id);
        let fresh = (entry.x, entry.y, entry.time);
        match self.window.get_mut(&ue) {
            // latest timestamp wins; equal timestamps resolve to file order
            Some(best) if entry.time < best.2 => {}
            Some(best) => *best = fresh,
            None => {
                self.window.insert(ue, fresh);
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for SlotStream<R> {
    type Item = Result<TimeSlotSnapshot>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(snapshot) = self.ready.pop_front() {
                return Some(Ok(snapshot));
            }
            if self.done {
                return None;
            }
            let mut line = String::new();
            self.line_no += 1;
            match self.reader.read_line(&mut line) {
                Ok(0) => {
                    self.done = true;
                    self.seal_window();
                    self.current_slot = None;
                }
                Ok(_) => {
                    if let Err(e) = self.ingest_line(&line) {
                        self.done = true;
                        return Some(Err(e));
                    }
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
    }
}

/// Truncates a slot sequence after `max_slots` snapshots; the underlying
/// reader is not consumed past that point.
pub fn limit_slots<I>(slots: I, max_slots: u64) -> impl Iterator<Item = Result<TimeSlotSnapshot>>
where
    I: Iterator<Item = Result<TimeSlotSnapshot>>,
{
    slots.take(max_slots as usize)
}
