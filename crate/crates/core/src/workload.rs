//! Packet activity generation and ingestion.
//!
//! Transfers follow an idealized TCP slow start: no loss, no window cap.
//! Each round doubles the congestion window and lands as a single downlink
//! event, so a transfer of `n` rounds is `n` events after the request.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Size of the uplink request that starts a download. Fits in one segment.
pub const DOWNLOAD_REQUEST_BYTES: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathModel {
    #[serde(rename = "base_rtt_s")]
    pub base_rtt: f64,
    /// Emulated one-way delay, added in both directions.
    #[serde(rename = "added_delay_s", default)]
    pub added_delay: f64,
    #[serde(rename = "bandwidth_Bps")]
    pub bandwidth: f64,
    #[serde(rename = "mss_B", default = "default_mss")]
    pub mss: u64,
    #[serde(default = "default_init_cwnd")]
    pub init_cwnd: u64,
}

fn default_mss() -> u64 {
    1460
}

fn default_init_cwnd() -> u64 {
    10
}

impl PathModel {
    pub fn effective_rtt(&self) -> f64 {
        self.base_rtt + 2.0 * self.added_delay
    }

    /// Bytes delivered in the first slow-start round.
    pub fn initial_window(&self) -> u64 {
        self.init_cwnd.saturating_mul(self.mss)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("base_rtt_s", self.base_rtt)?;
        ensure_finite("added_delay_s", self.added_delay)?;
        ensure_finite("bandwidth_Bps", self.bandwidth)?;
        if self.base_rtt <= 0.0 {
            return Err(Error::invalid("base_rtt_s", "must be > 0"));
        }
        if self.added_delay < 0.0 {
            return Err(Error::invalid("added_delay_s", "must be >= 0"));
        }
        if self.bandwidth <= 0.0 {
            return Err(Error::invalid("bandwidth_Bps", "must be > 0"));
        }
        if self.mss == 0 {
            return Err(Error::invalid("mss_B", "must be > 0"));
        }
        if self.init_cwnd == 0 {
            return Err(Error::invalid("init_cwnd", "must be >= 1"));
        }
        Ok(())
    }
}

/// What the client does once per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pattern {
    /// Send a request, receive a response one round trip later.
    RequestResponse {
        period_s: f64,
        request_bytes: u64,
        response_bytes: u64,
    },
    /// Fetch a resource over a slow-start transfer.
    Download { period_s: f64, resource_bytes: u64 },
}

impl Pattern {
    pub fn period(&self) -> f64 {
        match *self {
            Pattern::RequestResponse { period_s, .. } | Pattern::Download { period_s, .. } => period_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub pattern: Pattern,
    pub duration_s: f64,
    /// Keep the connection open between cycles, skipping the handshake after
    /// the first download.
    #[serde(default)]
    pub reuse_connection: bool,
}

impl Workload {
    pub fn validate(&self) -> Result<()> {
        let period = self.pattern.period();
        ensure_finite("pattern.period_s", period)?;
        ensure_finite("duration_s", self.duration_s)?;
        if period <= 0.0 {
            return Err(Error::invalid("pattern.period_s", "must be > 0"));
        }
        let zero_bytes = match self.pattern {
            Pattern::RequestResponse { request_bytes, response_bytes, .. } => {
                (request_bytes == 0).then_some("pattern.request_bytes").or(
                    (response_bytes == 0).then_some("pattern.response_bytes"),
                )
            }
            Pattern::Download { resource_bytes, .. } => {
                (resource_bytes == 0).then_some("pattern.resource_bytes")
            }
        };
        if let Some(field) = zero_bytes {
            return Err(Error::invalid(field, "must be > 0"));
        }
        if self.duration_s < period {
            return Err(Error::invalid("duration_s", "must be at least one period"));
        }
        Ok(())
    }

    /// Number of cycles started before the end of the run.
    pub fn cycles(&self) -> usize {
        let period = self.pattern.period();
        (0..)
            .take_while(|&c| (c as f64) * period < self.duration_s)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            other => Err(format!("direction must be `up` or `down`, got `{other}`")),
        }
    }
}

/// A packet burst, treated as instantaneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketEvent {
    pub t: f64,
    pub direction: Direction,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EventTrace {
    pub events: Vec<PacketEvent>,
    pub horizon: f64,
}

impl EventTrace {
    pub fn new(events: Vec<PacketEvent>, horizon: f64) -> Result<Self> {
        let trace = EventTrace { events, horizon };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("horizon", self.horizon)?;
        let mut prev = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if e.t.is_nan() || e.t < prev {
                return Err(Error::invalid(
                    format!("events[{i}].t"),
                    "timestamps must be >= 0 and non-decreasing",
                ));
            }
            if e.t > self.horizon {
                return Err(Error::invalid(format!("events[{i}].t"), "lies beyond the horizon"));
            }
            if e.bytes == 0 {
                return Err(Error::invalid(format!("events[{i}].bytes"), "must be > 0"));
            }
            prev = e.t;
        }
        Ok(())
    }

    pub fn total_bytes(&self) -> u64 {
        self.events.iter().map(|e| e.bytes).sum()
    }

    /// CSV with a `t_seconds,dir,bytes` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_seconds,dir,bytes\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", e.t, e.direction, e.bytes));
        }
        out
    }
}

/// Bytes delivered in each slow-start round: the window starts at
/// `init_cwnd * mss` and doubles every round.
pub fn slow_start_rounds(resource_bytes: u64, path: &PathModel) -> Vec<u64> {
    let mut rounds = Vec::new();
    let mut remaining = resource_bytes;
    let mut window = path.initial_window().max(1);
    while remaining > 0 {
        let chunk = window.min(remaining);
        rounds.push(chunk);
        remaining -= chunk;
        window = window.saturating_mul(2);
    }
    rounds
}

/// Packet events of one slow-start download starting at `start`.
///
/// The request goes up at `start`. Round `k` finishes arriving after the
/// handshake plus `k + 1` round trips plus the serialization time of all
/// bytes delivered so far. Rounds larger than the initial window arrive as
/// several back-to-back events, one per initial window, so the radio stays
/// in CR while the data streams in.
pub fn transfer_timeline(resource_bytes: u64, path: &PathModel, start: f64) -> Vec<PacketEvent> {
    transfer_events(resource_bytes, path, start, true)
}

fn transfer_events(resource_bytes: u64, path: &PathModel, start: f64, handshake: bool) -> Vec<PacketEvent> {
    let rtt = path.effective_rtt();
    let setup = if handshake { rtt } else { 0.0 };
    let slice = path.initial_window().max(1);
    let mut events = vec![PacketEvent {
        t: start,
        direction: Direction::Up,
        bytes: DOWNLOAD_REQUEST_BYTES,
    }];
    let mut delivered: u64 = 0;
    for (round, round_bytes) in slow_start_rounds(resource_bytes, path).into_iter().enumerate() {
        let arrival = start + setup + (round + 1) as f64 * rtt;
        let round_end = delivered + round_bytes;
        while delivered < round_end {
            let bytes = slice.min(round_end - delivered);
            delivered += bytes;
            events.push(PacketEvent {
                t: arrival + delivered as f64 / path.bandwidth,
                direction: Direction::Down,
                bytes,
            });
        }
    }
    events
}

/// Expands a workload into a packet trace with `horizon = duration_s`.
pub fn generate_trace(workload: &Workload, path: &PathModel) -> Result<EventTrace> {
    workload.validate().map_err(|e| e.within("workload"))?;
    path.validate().map_err(|e| e.within("path"))?;
    let period = workload.pattern.period();
    let horizon = workload.duration_s;
    let rtt = path.effective_rtt();
    let mut events = Vec::new();
    for cycle in 0..workload.cycles() {
        let start = cycle as f64 * period;
        let cycle_events = match workload.pattern {
            Pattern::RequestResponse {
                request_bytes,
                response_bytes,
                ..
            } => vec![
                PacketEvent {
                    t: start,
                    direction: Direction::Up,
                    bytes: request_bytes,
                },
                PacketEvent {
                    t: start + rtt + response_bytes as f64 / path.bandwidth,
                    direction: Direction::Down,
                    bytes: response_bytes,
                },
            ],
            Pattern::Download { resource_bytes, .. } => {
                let handshake = !(workload.reuse_connection && cycle > 0);
                transfer_events(resource_bytes, path, start, handshake)
            }
        };
        let completion = cycle_events.last().map_or(start, |e| e.t);
        let deadline = (start + period).min(horizon);
        if completion > deadline {
            return Err(Error::Overlap {
                cycle,
                completion_s: completion,
                deadline_s: deadline,
            });
        }
        events.extend(cycle_events);
    }
    Ok(EventTrace { events, horizon })
}

/// A parsed packet trace plus what had to be fixed up on the way in.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    pub trace: EventTrace,
    /// Input timestamps were out of order and have been sorted.
    pub reordered: bool,
}

/// Parses `t_seconds,dir,bytes` lines. A header line and `#` comments are allowed.
///
/// The horizon is the last timestamp unless `horizon` overrides it.
pub fn parse_packet_trace(text: &str, horizon: Option<f64>) -> Result<ParsedTrace> {
    let mut events = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_data && fields[0].parse::<f64>().is_err() {
            if fields != ["t_seconds", "dir", "bytes"] {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("unexpected header `{line}`"),
                });
            }
            seen_data = true;
            continue;
        }
        seen_data = true;
        let parse_err = |reason: String| Error::Parse { line: line_no, reason };
        if fields.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", fields.len())));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad timestamp `{}`", fields[0])))?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(parse_err(format!("timestamp must be finite and >= 0, got {t}")));
        }
        let direction: Direction = fields[1].parse().map_err(parse_err)?;
        let bytes: u64 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad byte count `{}`", fields[2])))?;
        if bytes == 0 {
            return Err(parse_err("byte count must be > 0".into()));
        }
        events.push(PacketEvent { t, direction, bytes });
    }

    let reordered = events.windows(2).any(|w| w[1].t < w[0].t);
    if reordered {
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    let last = events.last().map_or(0.0, |e| e.t);
    let horizon = match horizon {
        Some(h) if h < last => {
            return Err(Error::invalid("horizon", format!("{h} precedes the last event at {last}")))
        }
        Some(h) => h,
        None => last,
    };
    Ok(ParsedTrace {
        trace: EventTrace { events, horizon },
        reordered,
    })
}
