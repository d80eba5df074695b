//! Command-line front end: instance generation, sorting, extension
//! counting, heap-trace replay, structure fuzzing, trace verification, and
//! CSV benchmarks. All IO and file formats live here; the algorithms are in
//! `unisort-core`.

pub mod bench;
pub mod commands;
pub mod formats;
pub mod fuzz;

use std::collections::BTreeMap;

/// Exit codes: 0 = pass, 1 = verification failure, 2 = usage error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const USAGE: &str = "\
usage: unisort <command> [flags]

commands:
  gen <kind>     generate a DAG file and a compatible order file
                 kinds: edgeless, chain, k-chains, random-edges,
                        hamiltonian-plus-noise, interval-induced
                 flags: --n N, --seed S, --dag PATH, --order PATH,
                        [--k K] [--p P] [--q Q] [--w W]
  sort           sort an instance; prints the order and a stats CSV row
                 flags: --dag PATH, --order PATH,
                        [--algo unitopsort|full|mergesort] [--csv PATH]
                        [--check off|fast|full] [--scaled-thresholds]
  count          print the number of linear extensions of a DAG
                 flags: --dag PATH
  heap-replay    replay a push/pop trace; prints pops and per-op CSV
                 flags: --trace PATH [--csv PATH] [--check off|fast|full]
  fuzz           random operation traces with invariant checks; on failure
                 shrinks to a minimal witness
                 flags: --ops N, --n-cap N, --seed S [--trace OUT]
                        [--check fast|full] [--scaled-thresholds]
  verify         replay a structure trace, checking at every checkpoint
                 flags: --trace PATH [--check fast|full] [--scaled-thresholds]
  bench          run a suite and emit CSV rows
                 flags: --suite merge-regime|hamilton-regime|heapsort-regime,
                        --sizes a,b,c --seeds s1,s2 [--csv PATH]
                        [--scaled-thresholds]
";

/// Parsed command-line flags: `--name value` pairs plus boolean switches.
#[derive(Debug, Default)]
pub struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

const BOOL_FLAGS: &[&str] = &["--scaled-thresholds"];

impl Flags {
    pub fn parse(args: &[String]) -> Result<Flags, String> {
        let mut flags = Flags::default();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if !arg.starts_with("--") {
                return Err(format!("unexpected argument: {arg}"));
            }
            if BOOL_FLAGS.contains(&arg.as_str()) {
                flags.switches.push(arg.clone());
            } else {
                let value = it
                    .next()
                    .ok_or_else(|| format!("flag {arg} needs a value"))?;
                flags.values.insert(arg.clone(), value.clone());
            }
        }
        Ok(flags)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    pub fn required(&self, name: &str) -> Result<&str, String> {
        self.get(name).ok_or_else(|| format!("missing flag {name}"))
    }

    pub fn switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    pub fn parse_num<T: std::str::FromStr>(&self, name: &str) -> Result<T, String> {
        self.required(name)?
            .parse()
            .map_err(|_| format!("flag {name} is not a valid number"))
    }

    pub fn parse_num_or<T: std::str::FromStr>(&self, name: &str, default: T) -> Result<T, String> {
        match self.get(name) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| format!("flag {name} is not a valid number")),
        }
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run(args: &[String], out: &mut dyn std::io::Write) -> i32 {
    let Some(command) = args.first() else {
        let _ = write!(out, "{USAGE}");
        return EXIT_USAGE;
    };
    let rest = &args[1..];
    let result = match command.as_str() {
        "gen" => commands::gen(rest, out),
        "sort" => commands::sort(rest, out),
        "count" => commands::count(rest, out),
        "heap-replay" => commands::heap_replay(rest, out),
        "fuzz" => commands::fuzz_cmd(rest, out),
        "verify" => commands::verify(rest, out),
        "bench" => commands::bench_cmd(rest, out),
        "--help" | "help" => {
            let _ = write!(out, "{USAGE}");
            return EXIT_OK;
        }
        other => Err(format!("unknown command: {other}")),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(out, "error: {msg}");
            let _ = write!(out, "{USAGE}");
            EXIT_USAGE
        }
    }
}
