//! Round-trips sequences and parameters through the JSON formats used by the CLI.

use bellseq::constructors::pf_from_params;
use bellseq::json::{read_pf, read_seq, to_pretty, SeqDocument};
use bellseq::Rational;

fn main() {
    let params = read_pf::<Rational>(r#"{"p": ["1/2"], "q": [1]}"#).expect("valid params");
    let seq = pf_from_params(&params, 6).expect("valid sequence");
    let doc = SeqDocument::from_exact(&seq, 7, None);
    let text = to_pretty(&doc);
    print!("{text}");
    let back = read_seq(&text).and_then(|d| d.to_exact()).expect("round trip");
    assert_eq!(back, seq);

    // Errors carry a position or a field path.
    for bad in [r#"{"p": [0.5,"#, r#"{"p": ["1/0"]}"#, r#"{"r": []}"#] {
        match read_pf::<f64>(bad) {
            Ok(p) => println!("{bad:<16} -> parsed {p:?}"),
            Err(e) => println!("{bad:<16} -> {e}"),
        }
    }
}
