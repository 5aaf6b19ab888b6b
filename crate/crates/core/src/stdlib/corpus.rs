/// Definitions of `nbr` and `old`, made available to programs that use them.
pub const PRELUDE: &str = include_str!("../../../../corpus/prelude.xc");

#[derive(Clone, Copy, Debug)]
pub struct CorpusProgram {
    /// File stem under `corpus/`.
    pub name: &'static str,
    pub source: &'static str,
    /// The definition the program is about; it is the last one in the file.
    pub entry: &'static str,
    pub expected_type: &'static str,
    /// How the program's outputs are checked.
    pub oracle: &'static str,
}

macro_rules! program {
    ($name:literal, $entry:literal, $ty:literal, $oracle:literal) => {
        CorpusProgram {
            name: $name,
            source: include_str!(concat!("../../../../corpus/", $name, ".xc")),
            entry: $entry,
            expected_type: $ty,
            oracle: $oracle,
        }
    };
}

const PROGRAMS: &[CorpusProgram] = &[
    program!("distanceEstimate", "distanceEstimate", "(field[num]) -> num", "minimum of neighbour estimates plus distance"),
    program!("ping-pong", "ping-pong", "() -> field[num]", "k after k mutual exchanges, 0 after expiry"),
    program!("uniconn", "uniconn-count", "() -> field[num]", "consecutive rounds each neighbour was heard"),
    program!("distanceTo", "distanceTo", "(bool) -> num", "shortest-path distance to sources"),
    program!("average", "average", "(num, num) -> num", "weighted neighbourhood mean"),
    program!("closestFire", "closestFire", "(num, num) -> num", "distance to devices both hot and cloudy"),
    program!("distanceToGateways", "distanceToGateways", "(bool, bool) -> num", "distance over non-local devices"),
    program!(
        "distanceInServiceProvisioning",
        "distanceInServiceProvisioning",
        "(bool, bool, bool) -> num",
        "per-group shortest-path distance"
    ),
    program!("counter", "counter", "() -> num", "round number"),
    program!("display", "display", "() -> PAIR[PAIR[num, PAIR[num, num]], num]", "sensor readings"),
];

pub fn corpus() -> &'static [CorpusProgram] {
    PROGRAMS
}

pub fn corpus_program(name: &str) -> Option<&'static CorpusProgram> {
    PROGRAMS.iter().find(|p| p.name == name || p.entry == name)
}
