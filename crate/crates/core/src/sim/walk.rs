//! Straight-leg random walk on the unit disk with concentric zone rings.

use super::rng::SimRng;

/// Roots closer than this to the current position are the boundary just
/// crossed, not a new crossing.
const EPS: f64 = 1e-9;

/// Next geometric event of a walker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Step {
    /// Reaches a zone boundary after `distance`; `to` is the new 0-based zone,
    /// `None` when the walker leaves the cell.
    Cross { distance: f64, to: Option<usize> },
    /// Finishes the current leg after `distance` and turns.
    Turn { distance: f64 },
}

impl Step {
    pub(crate) fn distance(&self) -> f64 {
        match *self {
            Step::Cross { distance, .. } | Step::Turn { distance } => distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Walker {
    pub x: f64,
    pub y: f64,
    dx: f64,
    dy: f64,
    leg_left: f64,
    /// 0-based zone index.
    pub zone: usize,
}

impl Walker {
    /// Uniform position in the disk, fresh heading, full leg ahead.
    pub(crate) fn spawn(rng: &mut SimRng, outer: &[f64], leg: f64) -> Self {
        let r = rng.uniform().sqrt();
        let phi = rng.angle();
        let zone = zone_of_radius(outer, r);
        let mut w = Self {
            x: r * phi.cos(),
            y: r * phi.sin(),
            dx: 1.0,
            dy: 0.0,
            leg_left: leg,
            zone,
        };
        w.turn(rng, leg);
        w
    }

    #[cfg(test)]
    pub(crate) fn at(x: f64, y: f64, heading: f64, leg: f64, zone: usize) -> Self {
        Self {
            x,
            y,
            dx: heading.cos(),
            dy: heading.sin(),
            leg_left: leg,
            zone,
        }
    }

    pub(crate) fn turn(&mut self, rng: &mut SimRng, leg: f64) {
        let theta = rng.angle();
        self.dx = theta.cos();
        self.dy = theta.sin();
        self.leg_left = leg;
    }

    /// The earliest of: crossing the current zone's outer circle, crossing
    /// its inner circle, or finishing the leg.
    pub(crate) fn next_step(&self, outer: &[f64]) -> Step {
        let b = self.x * self.dx + self.y * self.dy;
        let r2 = self.x * self.x + self.y * self.y;
        let mut best = Step::Turn {
            distance: self.leg_left,
        };

        let big = outer[self.zone];
        let disc = (b * b - (r2 - big * big)).max(0.0);
        let s_out = -b + disc.sqrt();
        if s_out > EPS && s_out <= best.distance() {
            let to = self.zone.checked_sub(1);
            best = Step::Cross { distance: s_out, to };
        }

        if let Some(&small) = outer.get(self.zone + 1) {
            let disc = b * b - (r2 - small * small);
            if b < 0.0 && disc > 0.0 {
                let s_in = -b - disc.sqrt();
                if s_in > EPS && s_in <= best.distance() {
                    best = Step::Cross {
                        distance: s_in,
                        to: Some(self.zone + 1),
                    };
                }
            }
        }
        best
    }

    pub(crate) fn advance(&mut self, distance: f64) {
        self.x += self.dx * distance;
        self.y += self.dy * distance;
        self.leg_left = (self.leg_left - distance).max(0.0);
    }
}

pub(crate) fn zone_of_radius(outer: &[f64], r: f64) -> usize {
    outer.iter().rposition(|&o| r <= o).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const OUTER: [f64; 2] = [1.0, 0.5];

    #[test]
    fn crosses_inner_then_outer() {
        // From (0.8, 0) heading to -x: hits r = 0.5 after 0.3.
        let w = Walker::at(0.8, 0.0, std::f64::consts::PI, 2.0, 0);
        match w.next_step(&OUTER) {
            Step::Cross { distance, to } => {
                assert!((distance - 0.3).abs() < 1e-12);
                assert_eq!(to, Some(1));
            }
            s => panic!("{s:?}"),
        }
        let mut w = w;
        w.advance(0.3);
        w.zone = 1;
        // Chord through the inner disk has length 1.
        match w.next_step(&OUTER) {
            Step::Cross { distance, to } => {
                assert!((distance - 1.0).abs() < 1e-12);
                assert_eq!(to, Some(0));
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn leaves_the_cell_or_turns() {
        let w = Walker::at(0.9, 0.0, 0.0, 0.5, 0);
        assert_eq!(
            w.next_step(&OUTER),
            Step::Cross {
                distance: 0.09999999999999998,
                to: None
            }
        );
        let w = Walker::at(0.9, 0.0, 0.0, 0.05, 0);
        assert_eq!(w.next_step(&OUTER), Step::Turn { distance: 0.05 });
    }

    #[test]
    fn just_crossed_outward_does_not_recross() {
        // On the inner circle heading outward, now in zone 0.
        let w = Walker::at(0.5, 0.0, 0.0, 1.0, 0);
        match w.next_step(&OUTER) {
            Step::Cross { distance, to } => {
                assert!((distance - 0.5).abs() < 1e-12);
                assert_eq!(to, None);
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn spawn_is_uniform_over_area() {
        let mut rng = SimRng::for_replication(3, 0);
        let n = 100_000;
        let inner = (0..n)
            .filter(|_| Walker::spawn(&mut rng, &OUTER, 0.1).zone == 1)
            .count();
        assert!((inner as f64 / n as f64 - 0.25).abs() < 0.01);
    }
}
