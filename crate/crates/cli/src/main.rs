use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use collared_bratteli::analysis::{af_region, classify_gf, gap_profile, GfClass, Side};
use collared_bratteli::diagram::BratteliDiagram;
use collared_bratteli::exactnum::AlgebraicNumber;
use collared_bratteli::fixtures;
use collared_bratteli::paths::{
    decode, decode_collared, dotted_word, extremal_paths, format_periodic, pair_extremes, parse_periodic, parse_prefix,
    rb_equiv, vershik_step, vershik_successor, PathError,
};
use collared_bratteli::substitution::Substitution;
use collared_bratteli::verify::verify_paper;

#[derive(Parser)]
#[command(name = "bratteli", version, about = "Collared Bratteli diagrams of 1-d substitution tilings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Built-in system: fibonacci or thue-morse
    #[arg(long, conflicts_with = "spec")]
    fixture: Option<String>,
    /// Spec file (`letters:` / `rule X:` / `collar-names:` lines)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Collared alphabet and collared rules
    Collar {
        #[command(flatten)]
        source: Source,
    },
    /// Export the diagram
    Diagram {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decode a finite path into its patch
    Decode {
        #[command(flatten)]
        source: Source,
        /// Path literal, e.g. "root=a; ac ca ab"
        #[arg(long)]
        x: String,
        /// Include the expansions of the collar neighbours
        #[arg(long)]
        collared: bool,
    },
    /// Minimal and maximal paths and their pairing
    Extremes {
        #[command(flatten)]
        source: Source,
    },
    /// Iterate the successor map from an eventually periodic path
    Vershik {
        #[command(flatten)]
        source: Source,
        /// Eventually periodic path, e.g. "root=a; (ac ca)"
        #[arg(long)]
        x: String,
        /// Number of successor steps
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Decide whether two eventually periodic paths are related
    Rb {
        #[command(flatten)]
        source: Source,
        /// Eventually periodic path, e.g. "root=a; (ac ca)"
        #[arg(long)]
        x: String,
        /// Second eventually periodic path
        #[arg(long)]
        y: String,
    },
    /// Gap profile and, for eventually periodic paths, the G/F verdict
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Finite or eventually periodic path literal
        #[arg(long)]
        x: String,
        /// Generations shown for eventually periodic paths
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Check a built-in fixture against its published values
    VerifyPaper {
        fixture: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

/// `Variant: message`, so scripts can match on the error kind.
fn input_error<E: std::fmt::Debug + std::fmt::Display>(e: E) -> CliError {
    let debug = format!("{e:?}");
    let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
    CliError::Input(format!("{kind}: {e}"))
}

fn path_error(e: PathError) -> CliError {
    input_error(e)
}

fn num(a: &AlgebraicNumber) -> String {
    format!("{a} ({})", a.to_decimal(6))
}

fn load(source: &Source) -> Result<BratteliDiagram, CliError> {
    let csub = match (&source.fixture, &source.spec) {
        (Some(name), _) => {
            fixtures::by_name(name).ok_or_else(|| CliError::Input(format!("UnknownFixture: `{name}` (known: {})", fixtures::NAMES.join(", "))))?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Substitution::parse_spec(&text).and_then(|s| s.collared()).map_err(input_error)?
        }
        (None, None) => return Err(CliError::Input("give --fixture NAME or --spec PATH".to_string())),
    };
    Ok(BratteliDiagram::new(csub))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_collar(d: &BratteliDiagram) -> String {
    let csub = d.csub();
    let mut s = String::new();
    let mut order: Vec<usize> = (0..csub.len()).collect();
    order.sort_by_key(|&t| csub.name(t).to_string());
    writeln!(s, "collared letters: {}", csub.len()).unwrap();
    for &t in &order {
        writeln!(s, "  {} = {}   length {}", csub.name(t), csub.collar_text(t), num(csub.length(t))).unwrap();
    }
    writeln!(s, "collared rules:").unwrap();
    for &t in &order {
        writeln!(s, "  sigma({}) = {}", csub.name(t), csub.word_name(csub.rule(t))).unwrap();
    }
    s
}

fn diagram_summary(d: &BratteliDiagram) -> String {
    let mut s = String::new();
    writeln!(s, "lambda: {}", d.lambda().to_decimal(6)).unwrap();
    writeln!(s, "field: {}", d.field()).unwrap();
    writeln!(s, "vertices: {}", d.vertex_count()).unwrap();
    writeln!(s, "vertical edges: {}", d.verticals().len()).unwrap();
    for (e, t) in d.verticals().iter().enumerate() {
        writeln!(s, "  {} position {}   c = {}", d.vertical_name(e), t.position, num(&t.coeff)).unwrap();
    }
    let nontrivial: Vec<usize> = (0..d.horizontals().len()).filter(|&h| !d.horizontal(h).trivial).collect();
    writeln!(s, "nontrivial horizontal edges: {}", nontrivial.len()).unwrap();
    for h in nontrivial {
        writeln!(s, "  {}   c = {}", d.horizontal_name(h), num(&d.horizontal(h).coeff)).unwrap();
    }
    let recurrent = d.recurrent_diagrams();
    writeln!(s, "commutative diagrams: {}", recurrent.len()).unwrap();
    for q in &recurrent {
        writeln!(s, "  {}   sum = ({})*L^(n-2)", d.diagram_name(q), d.diagram_sum(q)).unwrap();
    }
    let transient = d.transient_diagrams();
    writeln!(s, "transient diagrams: {}", transient.len()).unwrap();
    for q in &transient {
        writeln!(s, "  {}", d.diagram_name(q)).unwrap();
    }
    s
}

fn cmd_decode(d: &BratteliDiagram, x: &str, collared: bool) -> Result<String, CliError> {
    let gamma = parse_prefix(d, x).map_err(path_error)?;
    let csub = d.csub();
    let mut s = String::new();
    if collared {
        let p = decode_collared(d, &gamma);
        let base = csub.base();
        let names: Vec<&str> = p.word.iter().map(|&w| base.letters()[w].name.as_str()).collect();
        writeln!(s, "word: {}", dotted_word(&names, p.puncture_index)).unwrap();
        writeln!(s, "core: letters {}..{} = {}", p.core.start, p.core.end, csub.word_name(&p.core_word)).unwrap();
        writeln!(s, "puncture index: {}", p.puncture_index).unwrap();
        writeln!(s, "offset u: {}", num(&p.offset)).unwrap();
        writeln!(s, "positions:").unwrap();
        for (name, (a, b)) in names.iter().zip(&p.positions) {
            writeln!(s, "  {name}  [{}, {}]", num(a), num(b)).unwrap();
        }
        return Ok(s);
    }
    let p = decode(d, &gamma);
    let names: Vec<&str> = p.word.iter().map(|&w| d.vertex_name(w)).collect();
    writeln!(s, "word: {}", dotted_word(&names, p.puncture_index)).unwrap();
    writeln!(s, "puncture index: {}", p.puncture_index).unwrap();
    writeln!(s, "offset u: {}", num(&p.offset)).unwrap();
    writeln!(s, "positions:").unwrap();
    for (name, (a, b)) in names.iter().zip(&p.positions) {
        writeln!(s, "  {name}  [{}, {}]", num(a), num(b)).unwrap();
    }
    s.push_str(&gap_table(&gap_profile(d, &gamma).gaps));
    Ok(s)
}

fn gap_table(gaps: &[(AlgebraicNumber, AlgebraicNumber)]) -> String {
    let mut s = String::from("generation  g_L  g_R\n");
    for (n, (l, r)) in gaps.iter().enumerate() {
        writeln!(s, "  {}  {}  {}", n + 1, num(l), num(r)).unwrap();
    }
    s
}

fn cmd_extremes(d: &BratteliDiagram) -> Result<String, CliError> {
    let (mins, maxs) = extremal_paths(d);
    let psi = pair_extremes(d).map_err(path_error)?;
    let mut s = String::new();
    writeln!(s, "minimal paths: {}", mins.len()).unwrap();
    for x in &mins {
        writeln!(s, "  {}", format_periodic(d, x)).unwrap();
    }
    writeln!(s, "maximal paths: {}", maxs.len()).unwrap();
    for x in &maxs {
        writeln!(s, "  {}", format_periodic(d, x)).unwrap();
    }
    writeln!(s, "psi:").unwrap();
    for (max, min) in &psi.pairs {
        writeln!(s, "  {}  ->  {}", format_periodic(d, max), format_periodic(d, min)).unwrap();
    }
    Ok(s)
}

fn cmd_vershik(d: &BratteliDiagram, x: &str, steps: usize) -> Result<String, CliError> {
    let mut x = parse_periodic(d, x).map_err(path_error)?;
    let psi = pair_extremes(d).map_err(path_error)?;
    let mut position = d.field().zero();
    let mut s = String::new();
    writeln!(s, "0  {}  puncture {}", format_periodic(d, &x), num(&position)).unwrap();
    for i in 1..=steps {
        let jump = x.is_maximal(d);
        let next = vershik_successor(d, &psi, &x).map_err(path_error)?;
        let step = if jump {
            let w = rb_equiv(d, &x, &next).ok_or_else(|| CliError::Input("maximal path not related to its image".to_string()))?;
            -&w.translation
        } else {
            vershik_step(d, &x, &next).expect("distinct paths")
        };
        position = &position + &step;
        let tag = if jump { "  (psi)" } else { "" };
        writeln!(s, "{i}  {}  puncture {}  step {}{tag}", format_periodic(d, &next), num(&position), num(&step)).unwrap();
        x = next;
    }
    Ok(s)
}

fn cmd_rb(d: &BratteliDiagram, x: &str, y: &str) -> Result<String, CliError> {
    let x = parse_periodic(d, x).map_err(path_error)?;
    let y = parse_periodic(d, y).map_err(path_error)?;
    let mut s = String::new();
    match rb_equiv(d, &x, &y) {
        None => writeln!(s, "None").unwrap(),
        Some(w) => {
            let names = |hs: &[usize]| hs.iter().map(|&h| d.horizontal_name(h)).collect::<Vec<_>>().join(" ");
            writeln!(s, "related from edge {}", w.n0).unwrap();
            if w.preamble.is_empty() {
                writeln!(s, "chain: ({})", names(&w.cycle)).unwrap();
            } else {
                writeln!(s, "chain: {} | ({})", names(&w.preamble), names(&w.cycle)).unwrap();
            }
            writeln!(s, "a(x,y) = {}", num(&w.translation)).unwrap();
        }
    }
    Ok(s)
}

fn cmd_analyze(d: &BratteliDiagram, x: &str, depth: usize) -> Result<String, CliError> {
    let mut s = String::new();
    match parse_periodic(d, x) {
        Ok(path) => {
            let g = gap_profile(d, &path.prefix(depth.max(1) - 1));
            s.push_str(&gap_table(&g.gaps));
            let region = af_region(d, &path, depth.max(1));
            writeln!(s, "AF-region at depth {}: {} punctures in [{}, {}]", depth.max(1), region.len(), num(&region[0]), num(&region[region.len() - 1])).unwrap();
            let verdict = match classify_gf(d, &path) {
                GfClass::F { side } => {
                    // the cycle adds nothing on that side, so the gap is fixed once the preamble ends
                    let settled = gap_profile(d, &path.prefix(path.periodic_from()));
                    let (l, r) = settled.gaps.last().expect("profile has generation 1");
                    match side {
                        Side::Left => format!("F (left boundary stays at distance {})", num(l)),
                        Side::Right => format!("F (right boundary stays at distance {})", num(r)),
                    }
                }
                GfClass::G { not_leftmost, not_rightmost } => {
                    format!("G (cycle edges {not_leftmost} and {not_rightmost} push both boundaries away)")
                }
            };
            writeln!(s, "verdict: {verdict}").unwrap();
        }
        Err(PathError::NotPeriodic) => {
            let gamma = parse_prefix(d, x).map_err(path_error)?;
            s.push_str(&gap_table(&gap_profile(d, &gamma).gaps));
            writeln!(s, "verdict: none (finite prefix)").unwrap();
        }
        Err(e) => return Err(path_error(e)),
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Collar { source } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_collar(&d))?;
        }
        Command::Diagram { source, depth, format } => {
            if depth == 0 {
                return Err(CliError::Input("--depth must be at least 1".to_string()));
            }
            let d = load(&source)?;
            let text = match format {
                Format::Text => diagram_summary(&d),
                Format::Json => d.export_json(),
                Format::Dot => d.export_dot(depth),
            };
            emit(source.out.as_ref(), &text)?;
        }
        Command::Decode { source, x, collared } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_decode(&d, &x, collared)?)?;
        }
        Command::Extremes { source } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_extremes(&d)?)?;
        }
        Command::Vershik { source, x, steps } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_vershik(&d, &x, steps)?)?;
        }
        Command::Rb { source, x, y } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_rb(&d, &x, &y)?)?;
        }
        Command::Analyze { source, x, depth } => {
            let d = load(&source)?;
            emit(source.out.as_ref(), &cmd_analyze(&d, &x, depth)?)?;
        }
        Command::VerifyPaper { fixture, out } => {
            let report = verify_paper(&fixture)
                .ok_or_else(|| CliError::Input(format!("UnknownFixture: `{fixture}` (known: {})", fixtures::NAMES.join(", "))))?;
            let mut s = String::new();
            for c in &report.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    writeln!(s, "{mark}  {}", c.name).unwrap();
                } else {
                    writeln!(s, "{mark}  {}  [{}]", c.name, c.detail).unwrap();
                }
            }
            let ok = report.all_passed();
            writeln!(s, "{}: {}", report.fixture, if ok { "all checks pass" } else { "some checks failed" }).unwrap();
            emit(out.as_ref(), &s)?;
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let (CliError::Input(m) | CliError::Io(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}
