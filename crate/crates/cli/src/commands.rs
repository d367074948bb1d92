use crate::report::{median, BenchReport, TransformReport};
use crate::{BenchArgs, ConvertArgs, GenArgs, MultiplyArgs, OperandArg, PlanArgs, TransformArgs, VerifyArgs};
use bitmm::bitmatrix;
use bitmm::decomposition::{self, Axis, Factor};
use bitmm::engine::{self, Basis};
use bitmm::{Algo, BitMatrix, BmmError, Builtin, LayerPlan, OpCounter, OpCounts, Operand, Semiring};
use std::path::Path;
use std::time::{Duration, Instant};

pub const EXIT_ARGS: u8 = 1;
pub const EXIT_FORMAT: u8 = 2;
pub const EXIT_SHAPE: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl From<BmmError> for CliError {
    fn from(e: BmmError) -> Self {
        let code = match e {
            BmmError::Format(_) | BmmError::Io(_) => EXIT_FORMAT,
            BmmError::Shape(_)
            | BmmError::Plan(_)
            | BmmError::Layout(_)
            | BmmError::ZeroDimension { .. }
            | BmmError::OutOfBounds { .. } => EXIT_SHAPE,
            BmmError::Unsupported(_) | BmmError::Program(_) | BmmError::Order(_) => EXIT_ARGS,
        };
        CliError::new(code, e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn is_text(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "txt")
}

fn read_matrix(path: &Path) -> CliResult<BitMatrix> {
    let m = if is_text(path) {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::new(EXIT_FORMAT, format!("{}: {e}", path.display())))?;
        BitMatrix::from_text(&text)
    } else {
        bitmatrix::load(path)
    };
    m.map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn write_matrix(path: &Path, m: &BitMatrix) -> CliResult {
    if is_text(path) {
        std::fs::write(path, m.to_text()).map_err(|e| CliError::new(EXIT_FORMAT, format!("{}: {e}", path.display())))
    } else {
        Ok(bitmatrix::save(path, m)?)
    }
}

fn default_workers(w: Option<usize>) -> CliResult<usize> {
    match w {
        Some(0) => Err(CliError::new(EXIT_ARGS, "--workers must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn check_supported(algo: Algo, ring: Semiring) -> CliResult {
    if algo.supports(ring) {
        return Ok(());
    }
    Err(CliError::new(
        EXIT_ARGS,
        match algo {
            Algo::BooleanCubic => format!("{algo} computes Boolean products; use --ring boolean"),
            _ => format!(
                "{algo} relies on cancellation (x + x = 0), which does not hold in the {ring} semiring; \
                 use cubic or boolean-cubic"
            ),
        },
    ))
}

fn is_fast(algo: Algo) -> bool {
    algo.decomposition().is_some()
}

fn resolve_plan(n: usize, args: &PlanArgs, workers: usize) -> CliResult<LayerPlan> {
    Ok(LayerPlan::resolve(n, args.d_host, args.d_serial, args.d_parallel, workers)?)
}

fn check_shapes(a: &BitMatrix, b: &BitMatrix, algo: Algo) -> CliResult {
    if a.cols() != b.rows() {
        return Err(CliError::new(
            EXIT_SHAPE,
            format!("cannot multiply {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        ));
    }
    if is_fast(algo) && !(a.is_square() && b.is_square() && a.rows().is_power_of_two() && a.rows() >= bitmm::BLOCK) {
        return Err(CliError::new(
            EXIT_SHAPE,
            format!(
                "{algo} needs square power-of-two operands of side at least {}, got {}x{} and {}x{}",
                bitmm::BLOCK,
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        ));
    }
    Ok(())
}

struct Timed {
    product: BitMatrix,
    time: Duration,
    counts: Option<OpCounts>,
}

fn run_once(
    a: &BitMatrix,
    b: &BitMatrix,
    algo: Algo,
    ring: Semiring,
    plan: Option<&LayerPlan>,
    workers: usize,
    include_transforms: bool,
) -> CliResult<Timed> {
    let Some(plan) = plan else {
        let start = Instant::now();
        let product = match algo {
            Algo::BooleanCubic => engine::multiply_boolean_reference(a, b, workers)?,
            _ => engine::multiply_cubic_with(a, b, ring, workers)?,
        };
        return Ok(Timed { product, time: start.elapsed(), counts: None });
    };
    let counter = OpCounter::new();
    let start = Instant::now();
    let (a_hat, b_hat) = engine::prepare(a, b, algo, plan, Some(&counter))?;
    let mid = Instant::now();
    let c_hat = engine::solve_prepared(&a_hat, &b_hat, algo, plan, Some(&counter))?;
    let solved = Instant::now();
    let product = engine::finish(c_hat, algo, plan, Some(&counter))?;
    let time = if include_transforms { start.elapsed() } else { solved - mid };
    Ok(Timed { product, time, counts: Some(counter.snapshot()) })
}

fn oracle(a: &BitMatrix, b: &BitMatrix, ring: Semiring, workers: usize) -> CliResult<BitMatrix> {
    Ok(engine::multiply_cubic_with(a, b, ring, workers)?)
}

pub fn gen(args: GenArgs) -> CliResult {
    let m = BitMatrix::random(args.n, args.cols.unwrap_or(args.n), args.seed)?;
    write_matrix(&args.out, &m)
}

pub fn convert(args: ConvertArgs) -> CliResult {
    let m = read_matrix(&args.input)?;
    write_matrix(&args.out, &m)
}

pub fn multiply(args: MultiplyArgs) -> CliResult {
    check_supported(args.algo, args.ring)?;
    let workers = default_workers(args.plan.workers)?;
    let a = read_matrix(&args.inputs[0])?;
    let b = read_matrix(&args.inputs[1])?;
    check_shapes(&a, &b, args.algo)?;
    let plan = if is_fast(args.algo) { Some(resolve_plan(a.rows(), &args.plan, workers)?) } else { None };
    let run = run_once(&a, &b, args.algo, args.ring, plan.as_ref(), workers, args.include_transforms)?;
    let mut report = BenchReport::new(
        args.algo,
        args.ring,
        (a.rows(), a.cols(), b.cols()),
        plan.as_ref(),
        workers,
        1,
        run.time,
        run.counts,
        args.include_transforms,
    );
    if args.check {
        report.check = Some(oracle(&a, &b, args.ring, workers)? == run.product);
    }
    if let Some(out) = &args.out {
        write_matrix(out, &run.product)?;
    }
    println!("{}", report.line());
    if report.check == Some(false) {
        return Err(CliError::new(EXIT_CHECK, "product differs from the cubic algorithm"));
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> CliResult {
    for &algo in &args.algos {
        check_supported(algo, args.ring)?;
    }
    let workers = default_workers(args.plan.workers)?;
    let (a, b) = match (&args.inputs[..], args.n) {
        ([pa, pb], _) => (read_matrix(pa)?, read_matrix(pb)?),
        (_, Some(n)) => (BitMatrix::random(n, n, args.seed)?, BitMatrix::random(n, n, args.seed.wrapping_add(1))?),
        _ => return Err(CliError::new(EXIT_ARGS, "give -n or --in A B")),
    };
    for &algo in &args.algos {
        check_shapes(&a, &b, algo)?;
    }
    let expected = if args.check { Some(oracle(&a, &b, args.ring, workers)?) } else { None };
    let mut failed = Vec::new();
    for &algo in &args.algos {
        let plan = if is_fast(algo) { Some(resolve_plan(a.rows(), &args.plan, workers)?) } else { None };
        let mut times = Vec::with_capacity(args.repeats as usize);
        let mut last = None;
        for _ in 0..args.repeats {
            let run = run_once(&a, &b, algo, args.ring, plan.as_ref(), workers, args.include_transforms)?;
            times.push(run.time);
            last = Some(run);
        }
        let last = last.expect("at least one repeat");
        let mut report = BenchReport::new(
            algo,
            args.ring,
            (a.rows(), a.cols(), b.cols()),
            plan.as_ref(),
            workers,
            args.repeats,
            median(&mut times),
            last.counts,
            args.include_transforms,
        );
        if let Some(expected) = &expected {
            let ok = *expected == last.product;
            report.check = Some(ok);
            if !ok {
                failed.push(algo.name());
            }
        }
        println!("{}", report.line());
    }
    if !failed.is_empty() {
        return Err(CliError::new(EXIT_CHECK, format!("output differs from the cubic algorithm: {}", failed.join(", "))));
    }
    Ok(())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn list(w: &[usize]) -> String {
    let items: Vec<_> = w.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(","))
}

fn verify_decomposition(builtin: Builtin, dump: bool) -> CliResult {
    let d = builtin.decomposition();
    let p = d.params();
    let mut all = true;
    let mut check = |label: &str, ok: bool| {
        println!("{label}: {}", mark(ok));
        all &= ok;
    };
    println!("decomposition {} <{},{},{}>_{}", d.name(), p.s, p.t, p.u, p.r);

    let triple = decomposition::compose(&d)?;
    check("triple product", decomposition::verify_triple_product(&triple));
    check(
        "kronecker square triple product",
        decomposition::verify_triple_product(&decomposition::kronecker_triple(&triple, &triple)),
    );
    for f in Factor::ALL {
        let ok = d.slp(f).matches(d.matrix(f));
        println!("slp {}: {} additions", f.name(), d.additions(f));
        check(&format!("slp {} matches matrix", f.name()), ok);
    }
    for f in [Factor::Phi, Factor::Psi, Factor::Chi] {
        check(&format!("{} invertible", f.name()), d.matrix(f).inverse_gf2()?.is_some());
    }
    let traits = d.traits();
    if traits.self_inverse_bases && !d.has_standard_bases() {
        for f in [Factor::Phi, Factor::Psi, Factor::Chi] {
            check(&format!("{} self-inverse", f.name()), decomposition::check_self_inverse(d.matrix(f))?);
        }
    }
    if traits.supports_chaining {
        check("chi inverse of phi", decomposition::check_mutual_inverse(d.chi(), d.phi())?);
        check("chi inverse of psi", decomposition::check_mutual_inverse(d.chi(), d.psi())?);
    }

    let bilinear = d.additions(Factor::Alpha) + d.additions(Factor::Beta) + d.additions(Factor::Gamma);
    let basis = d.additions(Factor::Phi) + d.additions(Factor::Psi) + d.additions(Factor::Chi);
    println!("bilinear additions: {bilinear}");
    println!("basis-change additions: {basis}");
    println!("multiplications: {}", p.r);
    println!("self-inverse bases: {}", traits.self_inverse_bases);
    println!("supports chaining: {}", traits.supports_chaining);
    let wa = decomposition::weight_distribution(d.alpha(), Axis::Rows);
    let wb = decomposition::weight_distribution(d.beta(), Axis::Rows);
    let wg = decomposition::weight_distribution(d.gamma(), Axis::Cols);
    println!("operand weights: {}/{}", list(&wa), list(&wb));
    println!("result weights: {}", list(&wg));

    if dump {
        for f in Factor::ALL {
            println!("{}:", f.name());
            print!("{}", d.matrix(f).to_text());
        }
    }
    println!("result: {}", mark(all));
    if all {
        Ok(())
    } else {
        Err(CliError::new(EXIT_CHECK, format!("{} failed verification", d.name())))
    }
}

pub fn verify(args: VerifyArgs) -> CliResult {
    if let Some(b) = args.decomposition {
        return verify_decomposition(b, args.dump);
    }
    let (Some(product), [pa, pb]) = (&args.product, &args.inputs[..]) else {
        return Err(CliError::new(EXIT_ARGS, "give --decomposition NAME or --in A B --product C"));
    };
    let a = read_matrix(pa)?;
    let b = read_matrix(pb)?;
    let c = read_matrix(product)?;
    check_shapes(&a, &b, Algo::Cubic)?;
    let ok = oracle(&a, &b, args.ring, default_workers(None)?)? == c;
    println!("product: {}", mark(ok));
    if ok {
        Ok(())
    } else {
        Err(CliError::new(EXIT_CHECK, "product differs from the cubic algorithm"))
    }
}

pub fn transform(args: TransformArgs) -> CliResult {
    let workers = default_workers(args.workers)?;
    let m = read_matrix(&args.input)?;
    let (out, report) = match args.basis {
        None => {
            let start = Instant::now();
            let t = m.transpose_blocks64()?;
            let time = start.elapsed();
            (t, TransformReport {
                transform: "transpose64".into(),
                direction: None,
                operand: None,
                n: m.rows(),
                levels: None,
                workers: 1,
                wall_time_seconds: time.as_secs_f64(),
            })
        }
        Some(builtin) => {
            if !args.forward && !args.inverse {
                return Err(CliError::new(EXIT_ARGS, "--basis needs --forward or --inverse"));
            }
            if !m.is_square() {
                return Err(CliError::new(EXIT_SHAPE, format!("basis change needs a square matrix, got {}x{}", m.rows(), m.cols())));
            }
            let levels = engine::outer_levels_for(m.rows())?;
            let d = builtin.decomposition();
            let (operand, basis) = match args.operand {
                OperandArg::Left => (Operand::Left, Basis::Phi),
                OperandArg::Right => (Operand::Right, Basis::Psi),
                OperandArg::Result => (Operand::Result, Basis::Chi),
            };
            // Forward takes a standard-basis operand into the alternative
            // basis; for results that is the inverse of chi.
            let apply_matrix = args.forward != (operand == Operand::Result);
            let v = bitmatrix::interleave(&m, levels, operand)?;
            let start = Instant::now();
            let v = if apply_matrix {
                engine::basis_change_with(v, &d, basis, levels, workers, None)?
            } else {
                engine::basis_change_inverse(v, &d, basis, levels, workers)?
            };
            let time = start.elapsed();
            (bitmatrix::deinterleave(&v, levels, operand)?, TransformReport {
                transform: builtin.name().into(),
                direction: Some(if args.forward { "forward" } else { "inverse" }.into()),
                operand: Some(format!("{operand:?}").to_lowercase()),
                n: m.rows(),
                levels: Some(levels),
                workers,
                wall_time_seconds: time.as_secs_f64(),
            })
        }
    };
    write_matrix(&args.out, &out)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}
