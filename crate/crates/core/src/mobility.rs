//! Random-waypoint movement and proximity detection.

use rand::Rng;

use crate::ids::NodeId;
use crate::node::{Node, NodeClass};
use crate::time::SimDuration;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_sq(self, other: Vec2) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Vec2) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Axis-aligned rectangle `[0, width] × [0, height]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec2 {
        let x = rng.gen::<f64>() * self.width;
        let y = rng.gen::<f64>() * self.height;
        Vec2::new(x, y)
    }
}

/// Current leg of a mobile node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub target: Vec2,
    /// m/s
    pub speed: f64,
    /// Remaining dwell time at the last waypoint, seconds.
    pub pause_left: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobilityConfig {
    pub area: Area,
    /// Speed range (m/s) per node class, indexed by [`NodeClass::index`].
    pub speeds: [(f64, f64); NodeClass::COUNT],
    pub pause: (SimDuration, SimDuration),
    pub tick: SimDuration,
}

impl MobilityConfig {
    fn draw_speed<R: Rng>(&self, class: NodeClass, rng: &mut R) -> f64 {
        let (lo, hi) = self.speeds[class.index()];
        lo + rng.gen::<f64>() * (hi - lo)
    }

    fn draw_pause<R: Rng>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = (self.pause.0.as_secs_f64(), self.pause.1.as_secs_f64());
        // always consume one draw so that pause settings never shift other draws
        let u = rng.gen::<f64>();
        lo + u * (hi - lo)
    }

    /// First leg of a node entering the area.
    pub fn initial_leg<R: Rng>(&self, class: NodeClass, rng: &mut R) -> Waypoint {
        let target = self.area.sample(rng);
        let speed = self.draw_speed(class, rng);
        Waypoint {
            target,
            speed,
            pause_left: 0.0,
        }
    }
}

const MAX_LEGS_PER_STEP: usize = 1_000;

/// Advances one node by `dt`. Returns the number of waypoints reached.
pub fn step_node<R: Rng>(
    node: &mut Node,
    config: &MobilityConfig,
    dt: SimDuration,
    rng: &mut R,
) -> usize {
    if !node.mobile {
        return 0;
    }
    let Some(mut w) = node.motion else {
        return 0;
    };
    let mut budget = dt.as_secs_f64();
    let mut pos = node.position;
    let mut legs = 0;
    while budget > 0.0 && legs < MAX_LEGS_PER_STEP {
        if w.pause_left > 0.0 {
            if w.pause_left >= budget {
                w.pause_left -= budget;
                break;
            }
            budget -= w.pause_left;
            w.pause_left = 0.0;
        }
        if w.speed <= 0.0 {
            break;
        }
        let d = pos.distance(w.target);
        let need = d / w.speed;
        if need > budget {
            let frac = w.speed * budget / d;
            pos = Vec2::new(
                pos.x + (w.target.x - pos.x) * frac,
                pos.y + (w.target.y - pos.y) * frac,
            );
            break;
        }
        pos = w.target;
        budget -= need;
        legs += 1;
        w.pause_left = config.draw_pause(rng);
        w.target = config.area.sample(rng);
        w.speed = config.draw_speed(node.class, rng);
    }
    node.position = pos;
    node.motion = Some(w);
    legs
}

/// Moves every mobile node that has a leg assigned. Static nodes never move.
pub fn step_mobility<R: Rng>(
    nodes: &mut [Node],
    config: &MobilityConfig,
    dt: SimDuration,
    rng: &mut R,
) {
    for n in nodes.iter_mut() {
        step_node(n, config, dt, rng);
    }
}

/// Registered node pairs within range of each other, as `(lower id, higher id)`.
///
/// A link needs both ends to hear each other, so the smaller of the two
/// ranges decides.
pub fn detect_contacts(nodes: &[Node]) -> Vec<(NodeId, NodeId)> {
    let mut live: Vec<&Node> = nodes.iter().filter(|n| n.registered).collect();
    live.sort_by(|a, b| a.position.x.total_cmp(&b.position.x).then(a.id.cmp(&b.id)));
    let max_range = live.iter().map(|n| n.comm_range).fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for (i, a) in live.iter().enumerate() {
        for b in &live[i + 1..] {
            if b.position.x - a.position.x > max_range {
                break;
            }
            let r = a.comm_range.min(b.comm_range);
            if a.position.distance_sq(b.position) <= r * r {
                pairs.push(if a.id < b.id {
                    (a.id, b.id)
                } else {
                    (b.id, a.id)
                });
            }
        }
    }
    pairs.sort();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> MobilityConfig {
        MobilityConfig {
            area: Area {
                width: 600.0,
                height: 600.0,
            },
            speeds: [(1.0, 2.0); NodeClass::COUNT],
            pause: (SimDuration::ZERO, SimDuration::from_millis(150)),
            tick: SimDuration::from_secs(1),
        }
    }

    fn registered(id: u32, class: NodeClass, range: f64, x: f64, y: f64) -> Node {
        let mut n = Node::new(NodeId(id), class, range, Vec2::new(x, y));
        n.registered = true;
        n
    }

    #[test]
    fn moves_along_unit_direction() {
        let mut n = registered(0, NodeClass::RescueVehicle, 60.0, 0.0, 0.0);
        n.motion = Some(Waypoint {
            target: Vec2::new(30.0, 40.0),
            speed: 5.0,
            pause_left: 0.0,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        step_node(&mut n, &cfg(), SimDuration::from_secs(1), &mut rng);
        assert!((n.position.x - 3.0).abs() < 1e-12 && (n.position.y - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_pause_redraws_immediately() {
        let mut c = cfg();
        c.pause = (SimDuration::ZERO, SimDuration::ZERO);
        let mut n = registered(0, NodeClass::Bystander, 20.0, 10.0, 10.0);
        n.motion = Some(Waypoint {
            target: Vec2::new(10.0, 10.0),
            speed: 1.0,
            pause_left: 0.0,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let legs = step_node(&mut n, &c, SimDuration::from_millis(500), &mut rng);
        assert_eq!(legs, 1);
        let w = n.motion.unwrap();
        assert_ne!(w.target, Vec2::new(10.0, 10.0));
        assert_eq!(w.pause_left, 0.0);
        assert!(n.position != Vec2::new(10.0, 10.0));
    }

    #[test]
    fn static_nodes_never_move() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = registered(0, NodeClass::NavigationController, 60.0, 100.0, 100.0);
        n.motion = Some(c.initial_leg(NodeClass::RescueVehicle, &mut rng));
        for _ in 0..1000 {
            step_node(&mut n, &c, c.tick, &mut rng);
        }
        assert_eq!(n.position, Vec2::new(100.0, 100.0));
    }

    #[test]
    fn range_boundary() {
        let a = registered(0, NodeClass::RescueVehicle, 60.0, 0.0, 0.0);
        let near = registered(1, NodeClass::RescueVehicle, 60.0, 59.0, 0.0);
        let far = registered(2, NodeClass::RescueVehicle, 60.0, 0.0, 61.0);
        assert_eq!(
            detect_contacts(&[a.clone(), near]),
            vec![(NodeId(0), NodeId(1))]
        );
        assert!(detect_contacts(&[a, far]).is_empty());
    }

    #[test]
    fn smaller_range_decides() {
        let v = registered(0, NodeClass::RescueVehicle, 60.0, 0.0, 0.0);
        let s = registered(1, NodeClass::Bystander, 10.0, 20.0, 0.0);
        assert!(detect_contacts(&[v, s]).is_empty());
    }

    #[test]
    fn no_self_contacts_and_unregistered_ignored() {
        let a = registered(0, NodeClass::RescueVehicle, 60.0, 0.0, 0.0);
        let mut b = registered(1, NodeClass::RescueVehicle, 60.0, 1.0, 0.0);
        assert!(detect_contacts(std::slice::from_ref(&a)).is_empty());
        b.registered = false;
        assert!(detect_contacts(&[a, b]).is_empty());
    }
}
