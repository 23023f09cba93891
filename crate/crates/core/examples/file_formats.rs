// Reading and writing the exact JSON formats.

use slocc::canon::{canonicalize, CanonOptions, Canonicalization};
use slocc::io::{parse_canon, parse_state, to_json, CanonFile};

const STATE: &str = r#"{"L": 3, "N": 2,
  "entries": [[["1", "0"], ["0", "1"]],
              [["1", "1"], ["0", "1"]],
              [["2", "3"], ["0", "2"]]]}"#;

pub fn run_example() -> slocc::Result<()> {
    let psi = parse_state(STATE)?.to_state()?;
    let Canonicalization::Full { cf, .. } = canonicalize(&psi, &CanonOptions::default())? else {
        unreachable!("full rank input")
    };
    let text = to_json(&CanonFile::from_canonical(&cf));
    print!("{text}");

    // writing what was read gives the same bytes
    let back = parse_canon(&text)?;
    assert_eq!(to_json(&back), text);
    assert_eq!(back.to_canonical()?, cf);
    Ok(())
}

fn main() -> slocc::Result<()> {
    run_example()
}
