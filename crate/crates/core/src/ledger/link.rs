use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkState {
    Up,
    Down,
}

/// One simulated link and the half-open tick intervals `[start, end)` during
/// which it is up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub up_intervals: Vec<[i64; 2]>,
}

impl LinkSpec {
    pub fn connects(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }

    pub fn state_at(&self, tick: i64) -> LinkState {
        if self.up_intervals.iter().any(|[s, e]| (*s..*e).contains(&tick)) {
            LinkState::Up
        } else {
            LinkState::Down
        }
    }
}

/// Link states over virtual time, with optional explicit overrides.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSchedule {
    pub links: Vec<LinkSpec>,
    /// `(tick, a, b, state)` overrides; the latest one at or before a tick wins.
    #[serde(default)]
    pub overrides: Vec<(i64, String, String, LinkState)>,
}

impl LinkSchedule {
    pub fn new(links: Vec<LinkSpec>) -> Self {
        LinkSchedule { links, overrides: Vec::new() }
    }

    pub fn set(&mut self, tick: i64, a: &str, b: &str, state: LinkState) {
        self.overrides.push((tick, a.to_owned(), b.to_owned(), state));
    }

    pub fn state_at(&self, a: &str, b: &str, tick: i64) -> LinkState {
        let over = self
            .overrides
            .iter()
            .filter(|(t, x, y, _)| *t <= tick && ((x == a && y == b) || (x == b && y == a)))
            .max_by_key(|(t, ..)| *t);
        if let Some((.., s)) = over {
            return *s;
        }
        self.links.iter().find(|l| l.connects(a, b)).map_or(LinkState::Down, |l| l.state_at(tick))
    }

    /// All declared or overridden pairs, each once, sorted.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = self
            .links
            .iter()
            .map(|l| (l.a.clone(), l.b.clone()))
            .chain(self.overrides.iter().map(|(_, a, b, _)| (a.clone(), b.clone())))
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort();
        pairs.dedup();
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_are_half_open() {
        let l = LinkSpec { a: "x".into(), b: "y".into(), up_intervals: vec![[0, 10], [20, 30]] };
        assert_eq!(l.state_at(0), LinkState::Up);
        assert_eq!(l.state_at(10), LinkState::Down);
        assert_eq!(l.state_at(25), LinkState::Up);
    }

    #[test]
    fn overrides_win_after_their_tick() {
        let mut s = LinkSchedule::new(vec![LinkSpec { a: "x".into(), b: "y".into(), up_intervals: vec![[0, 100]] }]);
        s.set(50, "y", "x", LinkState::Down);
        assert_eq!(s.state_at("x", "y", 49), LinkState::Up);
        assert_eq!(s.state_at("x", "y", 50), LinkState::Down);
        assert_eq!(s.state_at("x", "z", 0), LinkState::Down);
        assert_eq!(s.pairs(), vec![("x".to_string(), "y".to_string())]);
    }
}
