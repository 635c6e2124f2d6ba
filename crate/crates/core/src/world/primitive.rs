use serde::{Deserialize, Serialize};

use super::{AgentKind, Cell};

/// A high-level routine an agent runs until its terminal condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Primitive {
    MoveToLocation(Cell),
    CutTrees(u32),
    CutAllTrees,
    PickUpCivilian,
    DropOffCivilian,
    SprayWaterCone(Cell),
    RefillWater,
    DriveNoCut(Cell),
    DriveClearPath(Cell),
    FlyToLocation(Cell),
    PickUpFirefighters,
    DropOffFirefighters,
    DropWater,
    /// Explicit "do nothing" for one tick.
    Idle,
}

impl Primitive {
    /// The Multi-Step column of the primitives table.
    pub fn multi_step(&self) -> bool {
        matches!(
            self,
            Primitive::MoveToLocation(_)
                | Primitive::CutTrees(_)
                | Primitive::CutAllTrees
                | Primitive::DriveNoCut(_)
                | Primitive::DriveClearPath(_)
                | Primitive::FlyToLocation(_)
        )
    }

    pub fn target(&self) -> Option<Cell> {
        match *self {
            Primitive::MoveToLocation(c)
            | Primitive::SprayWaterCone(c)
            | Primitive::DriveNoCut(c)
            | Primitive::DriveClearPath(c)
            | Primitive::FlyToLocation(c) => Some(c),
            _ => None,
        }
    }

    pub fn allowed_for(&self, kind: AgentKind) -> bool {
        use AgentKind::*;
        match self {
            Primitive::Idle => true,
            Primitive::MoveToLocation(_)
            | Primitive::CutTrees(_)
            | Primitive::CutAllTrees
            | Primitive::PickUpCivilian
            | Primitive::DropOffCivilian
            | Primitive::SprayWaterCone(_) => kind == Firefighter,
            Primitive::RefillWater => matches!(kind, Firefighter | Helicopter),
            Primitive::DriveNoCut(_) | Primitive::DriveClearPath(_) => kind == Bulldozer,
            Primitive::FlyToLocation(_) => matches!(kind, Drone | Helicopter),
            Primitive::PickUpFirefighters | Primitive::DropOffFirefighters | Primitive::DropWater => kind == Helicopter,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Primitive::MoveToLocation(c) => format!("move to {c}"),
            Primitive::CutTrees(n) => format!("cut {n} trees in current cell"),
            Primitive::CutAllTrees => "cut all trees in current cell".into(),
            Primitive::PickUpCivilian => "pick up closest civilian".into(),
            Primitive::DropOffCivilian => "drop off civilian in current cell".into(),
            Primitive::SprayWaterCone(c) => format!("spray water cone toward {c}"),
            Primitive::RefillWater => "refill water".into(),
            Primitive::DriveNoCut(c) => format!("drive to {c} with plow raised"),
            Primitive::DriveClearPath(c) => format!("drive to {c} clearing a path"),
            Primitive::FlyToLocation(c) => format!("fly to {c}"),
            Primitive::PickUpFirefighters => "pick up nearby firefighters".into(),
            Primitive::DropOffFirefighters => "drop off all firefighters in current cell".into(),
            Primitive::DropWater => "drop water at current location".into(),
            Primitive::Idle => "do nothing".into(),
        }
    }

    /// Inverse of [`Primitive::describe`]; case and surrounding space are
    /// ignored.
    pub fn parse_description(text: &str) -> Option<Primitive> {
        let t = text.trim().to_ascii_lowercase();
        let fixed = [
            Primitive::CutAllTrees,
            Primitive::PickUpCivilian,
            Primitive::DropOffCivilian,
            Primitive::RefillWater,
            Primitive::PickUpFirefighters,
            Primitive::DropOffFirefighters,
            Primitive::DropWater,
            Primitive::Idle,
        ];
        if let Some(p) = fixed.into_iter().find(|p| p.describe() == t) {
            return Some(p);
        }
        if let Some(n) = t
            .strip_prefix("cut ")
            .and_then(|r| r.strip_suffix(" trees in current cell"))
        {
            return n.parse().ok().map(Primitive::CutTrees);
        }
        let forms: [(&str, &str, fn(Cell) -> Primitive); 5] = [
            ("move to ", "", Primitive::MoveToLocation),
            ("spray water cone toward ", "", Primitive::SprayWaterCone),
            ("drive to ", " with plow raised", Primitive::DriveNoCut),
            ("drive to ", " clearing a path", Primitive::DriveClearPath),
            ("fly to ", "", Primitive::FlyToLocation),
        ];
        for (pre, post, make) in forms {
            if let Some(c) = t
                .strip_prefix(pre)
                .and_then(|r| r.strip_suffix(post))
                .and_then(parse_cell)
            {
                return Some(make(c));
            }
        }
        None
    }
}

/// Reads "(x, y)" as printed by `Cell`'s Display.
pub fn parse_cell(s: &str) -> Option<Cell> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some(Cell::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_step_column() {
        let c = Cell::new(0, 0);
        let multi = [
            Primitive::MoveToLocation(c),
            Primitive::CutTrees(2),
            Primitive::CutAllTrees,
            Primitive::DriveNoCut(c),
            Primitive::DriveClearPath(c),
            Primitive::FlyToLocation(c),
        ];
        let single = [
            Primitive::PickUpCivilian,
            Primitive::DropOffCivilian,
            Primitive::SprayWaterCone(c),
            Primitive::RefillWater,
            Primitive::PickUpFirefighters,
            Primitive::DropOffFirefighters,
            Primitive::DropWater,
        ];
        assert!(multi.iter().all(|p| p.multi_step()));
        assert!(single.iter().all(|p| !p.multi_step()));
    }

    #[test]
    fn drone_can_only_fly() {
        let c = Cell::new(1, 1);
        assert!(Primitive::FlyToLocation(c).allowed_for(AgentKind::Drone));
        assert!(!Primitive::MoveToLocation(c).allowed_for(AgentKind::Drone));
        assert!(!Primitive::DropWater.allowed_for(AgentKind::Drone));
    }

    #[test]
    fn descriptions_round_trip() {
        let c = Cell::new(12, 7);
        let all = [
            Primitive::MoveToLocation(c),
            Primitive::CutTrees(2),
            Primitive::CutAllTrees,
            Primitive::PickUpCivilian,
            Primitive::DropOffCivilian,
            Primitive::SprayWaterCone(c),
            Primitive::RefillWater,
            Primitive::DriveNoCut(c),
            Primitive::DriveClearPath(c),
            Primitive::FlyToLocation(c),
            Primitive::PickUpFirefighters,
            Primitive::DropOffFirefighters,
            Primitive::DropWater,
            Primitive::Idle,
        ];
        for p in all {
            assert_eq!(Primitive::parse_description(&p.describe()), Some(p), "{p:?}");
        }
        assert_eq!(
            Primitive::parse_description("Move to ( 3 ,4 )"),
            Some(Primitive::MoveToLocation(Cell::new(3, 4)))
        );
        assert_eq!(Primitive::parse_description("dance"), None);
    }
}
