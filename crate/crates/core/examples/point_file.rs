//! Runs the `predicate` subcommand on an in-memory point file, including a
//! bit-exact hexadecimal row and a malformed row.

use std::io::Cursor;

fn run(input: &str, args: &[&str]) {
    let mut stdin = Cursor::new(input.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = certpred::cli::run(args.iter().copied(), false, &mut stdin, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    println!("exit code {code}");
}

fn main() {
    let good = "\
# four points per line, sphere through the origin and the first three
1 0 0, 0 1 0, 0 0 1, 1 1 0
1 0 0, 0 1 0, 0 0 1, 0x1.0p0 0x1.0p0 0x1.0p-52
0.5 0.25 0 -0.5 0.5 0.1 0 0 0.9 0.1 0.1 0.1
";
    run(good, &["certpred", "predicate", "--dim", "3", "--test", "insphere", "--format", "text"]);
    run("1 0 0, 0 1 0, 0 0 1, 1.5 0 0\n", &["certpred", "predicate", "--dim", "3", "--test", "insphere"]);
}
