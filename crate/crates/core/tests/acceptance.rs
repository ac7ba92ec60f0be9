//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion with its
//! runtime and exits non-zero if any criterion fails.
//!
//! Every check compares the library against an oracle written here from
//! the raw system data: hand-coded maps, brute-force enumeration, or a
//! plain dynamic program.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;

use wps::characters::{disc_data, eval_character, radius_sq_at, solve_zeroing_pair, zeroing_residual, Mobius};
use wps::conjugacy::finite::find_graph_conjugacy_finite;
use wps::conjugacy::{
    check_branch_transition, check_graph_conjugacy, decide, forced_h_values, replay_path, replay_witness,
    transition_ratio, verify_weighted_orbit_certificate, Certificate, Gamma, Gap, Pt, Relation, Side, Verdict,
    Witness, DEFAULT_DEPTH,
};
use wps::correspondence::{
    abs_sq, inner_product, is_tensor_power_bounded, module_action, multiplier_from_certificate, norm_sq,
    path_inner_product, path_norm_sq, path_weight, paths, real, sup_norm_sq, tensor, tensor_power_norm_sq, Cq,
    CorrElement, Multiplier, PowerBound, Quiver,
};
use wps::fock::{
    ad_v, cesaro, fejer_kernel, matrix, op_norm, op_norm_weighted, series_product, FockMatrix, FockSpace,
    FourierElement,
};
use wps::rational::{int, ratio, to_f64, Rational};
use wps::spaces::{Interval, PlFunc, Subset};
use wps::wps::{FiniteSystem, IntervalSystem, Wps};
use wps::{corpus, random};

/// Gauge covariance and Fourier projections on matrices.
const GAUGE_TOL: f64 = 1e-12;
/// Band operator norm against the module norm, relative.
const BAND_TOL: f64 = 1e-9;
/// `Ad_V` bound, relative slack.
const ADV_TOL: f64 = 1e-9;
/// Character multiplicativity, relative.
const THETA_TOL: f64 = 1e-9;
/// Zeroing composition residual.
const ZEROING_TOL: f64 = 1e-9;
/// `|λ| = |γ| = 1` and `λ(γ − h) = γ − 1`.
const PAIR_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: wps::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn q(s: &str) -> Rational {
    wps::rational::parse_rational(s).expect("literal rational")
}

fn criterion(id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let took = start.elapsed();
    let (ok, msg) = match result {
        Ok(m) if took <= budget => (true, m),
        Ok(m) => (false, format!("{m}; over the {budget:?} budget")),
        Err(m) => (false, m),
    };
    println!(
        "criterion {id} {} {title}: {msg} [{} ms, budget {} ms]",
        if ok { "PASS" } else { "FAIL" },
        took.as_millis(),
        budget.as_millis()
    );
    ok
}

// ---------------------------------------------------------------- oracles

/// `Σ w_i(x)` over the branches with `σ_i(x) = y`, straight from the branch data.
fn raw_interval_weight(sys: &IntervalSystem, y: &Rational, x: &Rational) -> Rational {
    sys.branches
        .iter()
        .filter(|b| b.map.evaluate(x).map(|v| &v == y).unwrap_or(false))
        .map(|b| b.weight.evaluate(x).expect("weight defined where the map is"))
        .sum()
}

fn raw_finite_weight(sys: &FiniteSystem, y: usize, x: usize) -> Rational {
    sys.branches
        .iter()
        .filter_map(|b| b.entries.get(&x).filter(|(r, _)| *r == y).map(|(_, w)| w.clone()))
        .sum()
}

fn edge_set(sys: &FiniteSystem) -> BTreeSet<(usize, usize)> {
    sys.branches.iter().flat_map(|b| b.entries.iter().map(|(&s, (r, _))| (*r, s))).collect()
}

/// Does `perm` carry the graph of `a` onto the graph of `b`?
fn is_isomorphism(a: &BTreeSet<(usize, usize)>, b: &BTreeSet<(usize, usize)>, perm: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|&(r, s)| b.contains(&(perm[r], perm[s])))
}

/// Brute force over all `n!` bijections.
fn brute_isomorphism(a: &FiniteSystem, b: &FiniteSystem) -> Option<Vec<usize>> {
    fn go(k: usize, perm: &mut Vec<usize>, used: &mut Vec<bool>, test: &dyn Fn(&[usize]) -> bool) -> bool {
        if k == used.len() {
            return test(perm);
        }
        for y in 0..used.len() {
            if !used[y] {
                used[y] = true;
                perm.push(y);
                if go(k + 1, perm, used, test) {
                    return true;
                }
                perm.pop();
                used[y] = false;
            }
        }
        false
    }
    if a.len() != b.len() {
        return None;
    }
    let (ea, eb) = (edge_set(a), edge_set(b));
    let mut perm = Vec::new();
    go(0, &mut perm, &mut vec![false; a.len()], &|p| is_isomorphism(&ea, &eb, p)).then_some(perm)
}

fn degree_sequence(sys: &FiniteSystem) -> Vec<(usize, usize)> {
    let e = edge_set(sys);
    let mut d: Vec<(usize, usize)> = (0..sys.len())
        .map(|x| (e.iter().filter(|&&(r, _)| r == x).count(), e.iter().filter(|&&(_, s)| s == x).count()))
        .collect();
    d.sort();
    d
}

/// `best[n][v]`: largest product of `factor` over paths of exactly `n` edges
/// ending at `v` (`None` if there is no such path).
fn path_products(q: &Quiver, factor: &[Rational], max_len: usize) -> Vec<Vec<Option<Rational>>> {
    let mut best = vec![vec![Some(Rational::one()); q.points]];
    for n in 1..=max_len {
        let mut next: Vec<Option<Rational>> = vec![None; q.points];
        for (k, &(r, s)) in q.edges.iter().enumerate() {
            if let Some(p) = &best[n - 1][s] {
                let cand = p * &factor[k];
                if next[r].as_ref().is_none_or(|old| &cand > old) {
                    next[r] = Some(cand);
                }
            }
        }
        best.push(next);
    }
    best
}

fn max_at_length(best: &[Vec<Option<Rational>>], n: usize) -> Rational {
    best[n].iter().flatten().cloned().max().unwrap_or_else(Rational::zero)
}

/// `sup_n` of the largest path product, or `None` when some closed walk of
/// length at most the number of points has product above one.
fn oracle_sup(q: &Quiver, factor: &[Rational]) -> Option<Rational> {
    for start in 0..q.points {
        let mut reach: Vec<Option<Rational>> = vec![None; q.points];
        reach[start] = Some(Rational::one());
        for _ in 0..q.points {
            let mut next: Vec<Option<Rational>> = vec![None; q.points];
            for (k, &(r, s)) in q.edges.iter().enumerate() {
                if let Some(p) = &reach[s] {
                    let cand = p * &factor[k];
                    if next[r].as_ref().is_none_or(|old| &cand > old) {
                        next[r] = Some(cand);
                    }
                }
            }
            if next[start].as_ref().is_some_and(|p| p > &Rational::one()) {
                return None;
            }
            reach = next;
        }
    }
    let best = path_products(q, factor, q.points.saturating_sub(1));
    Some((0..best.len()).map(|n| max_at_length(&best, n)).max().unwrap_or_else(Rational::one))
}

fn complex_vec(rng: &mut impl Rng, n: usize) -> Vec<Cq> {
    (0..n).map(|_| random::complex_rational(rng)).collect()
}

fn corr(rng: &mut impl Rng, q: &Quiver) -> CorrElement {
    CorrElement { values: complex_vec(rng, q.edges.len()) }
}

/// Target weights and a gap `H = (w/u)·φ(r)/φ(s)`, so every cycle product
/// of the factors is one and both `V` and `V⁻¹` are tensor-power bounded.
fn coboundary_multiplier(rng: &mut impl Rng, q: &Quiver) -> Multiplier {
    let phi: Vec<Rational> = (0..q.points).map(|_| random::positive_rational(rng)).collect();
    let u: Vec<Rational> = q.edges.iter().map(|_| random::positive_rational(rng)).collect();
    let h = q.edges.iter().enumerate().map(|(k, &(r, s))| &q.weights[k] / &u[k] * &phi[r] / &phi[s]).collect();
    Multiplier::new(q.clone(), u, h).expect("positive data")
}

fn max_entry(m: &FockMatrix<Complex64>) -> f64 {
    m.fibers.iter().flat_map(|f| f.iter().map(|z| z.norm())).fold(0.0, f64::max)
}

fn zero_matrix_like(m: &FockMatrix<Complex64>) -> FockMatrix<Complex64> {
    FockMatrix { fibers: m.fibers.iter().map(|f| f.map(|_| Complex64::new(0.0, 0.0))).collect() }
}

// ------------------------------------------------------------- criteria

fn c1_branch_transition() -> Outcome {
    let e = lib(corpus::entry("cpc-distinct-btc"))?;
    let (a, b) = (&e.a, &e.b);
    let (ra, rb) = (lib(a.as_interval())?, lib(b.as_interval())?);
    let id = Gamma::identity(&a.space());
    let tr = lib(transition_ratio(a, b, &id))?;
    let zero = Rational::zero();
    for x in ["1/7", "1/3", "1/2", "3/4", "1"].map(q) {
        let diag = tr.at(&Pt::Real(x.clone()), &Pt::Real(x.clone()));
        let vert = tr.at(&Pt::Real(zero.clone()), &Pt::Real(x.clone()));
        let diag_oracle = raw_interval_weight(rb, &x, &x) / raw_interval_weight(ra, &x, &x);
        let vert_oracle = raw_interval_weight(rb, &zero, &x) / raw_interval_weight(ra, &zero, &x);
        ensure(diag.as_ref() == Some(&q("3/2")) && diag_oracle == q("3/2"), || format!("ratio at ({x},{x}) is {diag:?}"))?;
        ensure(vert.as_ref() == Some(&q("3/4")) && vert_oracle == q("3/4"), || format!("ratio at (0,{x}) is {vert:?}"))?;
    }
    let origin = tr.at(&Pt::Real(zero.clone()), &Pt::Real(zero.clone()));
    let origin_oracle = raw_interval_weight(rb, &zero, &zero) / raw_interval_weight(ra, &zero, &zero);
    ensure(origin.as_ref() == Some(&int(1)) && origin_oracle == int(1), || format!("ratio at (0,0) is {origin:?}"))?;

    let btc = lib(check_branch_transition(a, b, &id))?;
    let Verdict::Fails { witness: w @ Witness::LimitMismatch { range, source, value, limits }, .. } = &btc else {
        return Err(format!("branch transition: expected a limit mismatch, got {}", btc.name()));
    };
    let limit_set: BTreeSet<Rational> = limits.iter().cloned().collect();
    ensure(
        *range == Pt::Real(zero.clone()) && *source == Pt::Real(zero.clone()) && *value == int(1),
        || format!("mismatch reported at ({range},{source}) with value {value}"),
    )?;
    ensure(limit_set.iter().all(|l| *l == q("3/2") || *l == q("3/4")) && !limit_set.is_empty(), || {
        format!("limits {limits:?}")
    })?;
    ensure(lib(replay_witness(a, b, &id, None, w))?, || "limit witness does not replay".into())?;

    let forced = lib(forced_h_values(a, b, &id))?;
    let Verdict::Fails { witness: w @ Witness::ForcedDiscontinuity { point, forced: f0, limit }, .. } = &forced.verdict
    else {
        return Err(format!("forced gap: expected a discontinuity, got {}", forced.verdict.name()));
    };
    let loop_oracle = raw_interval_weight(ra, &q("1/2"), &q("1/2")) / raw_interval_weight(rb, &q("1/2"), &q("1/2"));
    let origin_forced = raw_interval_weight(ra, &zero, &zero) / raw_interval_weight(rb, &zero, &zero);
    ensure(
        *point == zero && *f0 == origin_forced && *f0 == int(1) && *limit == loop_oracle && *limit == q("2/3"),
        || format!("forced discontinuity at {point}: forced {f0}, limit {limit}"),
    )?;
    ensure(lib(replay_witness(a, b, &id, None, w))?, || "forced witness does not replay".into())?;
    let woc = lib(decide(a, b, Relation::WeightedOrbit, None, None, DEFAULT_DEPTH))?;
    ensure(woc.verdict.fails(), || format!("weighted orbit over all candidates: {}", woc.verdict.name()))?;
    Ok("ratios 3/2, 3/4, 1; BTC fails at (0,0); forced H 1 against limit 2/3".into())
}

/// `σ_1`, `σ_2 = σ_3 = 0` of the different-invariants pair, hand-coded.
fn s1(x: &Rational) -> Rational {
    if *x <= q("1/2") {
        int(1)
    } else {
        int(2) - int(2) * x
    }
}

/// Corrected gap with knots at 3/4.
fn h_star(i: usize, x: &Rational) -> Rational {
    let t = q("3/4");
    match (i, *x <= t) {
        (0, true) => q("1/2"),
        (0, false) => q("1/2") + int(2) * (x - t),
        (_, true) => int(2),
        (_, false) => int(2) - int(4) * (x - t),
    }
}

fn c2_different_invariants() -> Outcome {
    let e = lib(corpus::entry("different-invariants"))?;
    let early = lib(corpus::entry("different-invariants-early-switch"))?;
    let (a, b) = (&e.a, &e.b);
    let (ra, rb) = (lib(a.as_interval())?, lib(b.as_interval())?);
    let id = Gamma::identity(&a.space());
    ensure(lib(check_graph_conjugacy(a, b, &id))?.holds(), || "graphs differ under the identity".into())?;

    let (zero, one) = (Rational::zero(), int(1));
    let btc = lib(check_branch_transition(a, b, &id))?;
    let Verdict::Fails { witness: Witness::LimitMismatch { range, source, value, limits }, .. } = &btc else {
        return Err(format!("branch transition: expected a limit mismatch, got {}", btc.name()));
    };
    let got: BTreeSet<Rational> = limits.iter().cloned().collect();
    let near = q("999/1000");
    let oracle: BTreeSet<Rational> = [
        raw_interval_weight(rb, &zero, &near) / raw_interval_weight(ra, &zero, &near),
        raw_interval_weight(rb, &s1(&near), &near) / raw_interval_weight(ra, &s1(&near), &near),
    ]
    .into();
    let at_edge = raw_interval_weight(rb, &zero, &one) / raw_interval_weight(ra, &zero, &one);
    ensure(
        *range == Pt::Real(zero.clone()) && *source == Pt::Real(one.clone()) && *value == at_edge && at_edge == one,
        || format!("mismatch at ({range},{source}) value {value}"),
    )?;
    ensure(got == oracle && got == [q("1/2"), int(2)].into(), || format!("limits {got:?}, oracle {oracle:?}"))?;

    let cert = early.certificate.as_ref().ok_or("early-switch entry has no certificate")?;
    let v = lib(verify_weighted_orbit_certificate(&early.a, &early.b, cert, DEFAULT_DEPTH))?;
    let Verdict::Fails { witness: Witness::Path(pw), .. } = &v else {
        return Err(format!("early-switch gap: expected a path witness, got {}", v.name()));
    };
    let fp = q("2/3");
    ensure(s1(&fp) == fp, || "2/3 is not fixed by s1".into())?;
    // the early-switch gap on s1 over [1/2, 1] is x itself
    let factor = fp.clone() * raw_interval_weight(rb, &fp, &fp) / raw_interval_weight(ra, &fp, &fp);
    let c = q("16");
    let k = (1..).find(|&k| num_traits::pow(factor.clone(), k) > c).expect("factor above one");
    ensure(factor == q("4/3") && k == 10, || format!("oracle factor {factor}, k {k}"))?;
    ensure(
        pw.source == Pt::Real(fp.clone())
            && pw.steps.len() == k
            && pw.product == num_traits::pow(factor.clone(), k)
            && pw.product == q("1048576/59049")
            && pw.side == Side::Upper,
        || format!("witness from {} with {} steps, product {}", pw.source, pw.steps.len(), pw.product),
    )?;
    ensure(lib(replay_path(&early.a, &early.b, cert, &pw.source, &pw.steps))? == pw.product, || "replay differs".into())?;

    let star = e.certificate.as_ref().ok_or("entry has no corrected certificate")?;
    ensure(star.c == int(4), || format!("corrected C is {}", star.c))?;
    let v = lib(verify_weighted_orbit_certificate(a, b, star, DEFAULT_DEPTH))?;
    ensure(v.holds(), || format!("corrected certificate: {}", v.name()))?;

    // sampled paths under the hand-coded corrected gap
    let maps: [fn(&Rational) -> Rational; 3] = [s1, |_| Rational::zero(), |_| Rational::zero()];
    let (lo_c, hi_c) = (star.c.recip(), star.c.clone());
    let (mut lo, mut hi, mut count) = (int(1), int(1), 0usize);
    let mut starts: Vec<Rational> = (0..=48).map(|k| ratio(k, 48)).collect();
    starts.push(fp);
    let mut stack: Vec<(Rational, Rational, usize)> = starts.into_iter().map(|x| (x, int(1), 0)).collect();
    while let Some((x, p, len)) = stack.pop() {
        count += 1;
        lo = lo.min(p.clone());
        hi = hi.max(p.clone());
        if len == 10 {
            continue;
        }
        let mut seen = BTreeSet::new();
        for (i, m) in maps.iter().enumerate() {
            let y = m(&x);
            if !seen.insert(y.clone()) {
                continue;
            }
            let f = h_star(i, &x) * raw_interval_weight(rb, &y, &x) / raw_interval_weight(ra, &y, &x);
            stack.push((y, p.clone() * f, len + 1));
        }
    }
    ensure(lo >= lo_c && hi <= hi_c, || format!("sampled products span [{lo}, {hi}]"))?;
    Ok(format!(
        "BTC limits {{1/2, 2}} vs 1 at (0,1); early-switch H refuted at (2/3,2/3) after 10 steps; H* with C = 4 holds ({count} sampled paths in [{lo}, {hi}])"
    ))
}

fn c3_finite_collapse() -> Outcome {
    let mut rng = random::rng(3);
    let rels = [Relation::Graph, Relation::BranchTransition, Relation::WeightedOrbit];
    for trial in 0..50 {
        let n = rng.gen_range(1..=7);
        let a = random::matrix_system(&mut rng, n, 0.4);
        let perm = random::permutation(&mut rng, n);
        let b = random::relabel_reweight(&mut rng, &a, &perm);
        let found = lib(find_graph_conjugacy_finite(&a, &b))?.ok_or(format!("pair {trial}: no isomorphism found"))?;
        ensure(is_isomorphism(&edge_set(&a), &edge_set(&b), &found), || format!("pair {trial}: found map is wrong"))?;
        ensure(brute_isomorphism(&a, &b).is_some(), || format!("pair {trial}: brute force disagrees"))?;
        let (wa, wb) = (Wps::Finite(a), Wps::Finite(b));
        for rel in rels {
            let d = lib(decide(&wa, &wb, rel, None, None, DEFAULT_DEPTH))?;
            ensure(d.verdict.holds(), || format!("pair {trial}: {} is {}", rel.name(), d.verdict.name()))?;
        }
    }
    for trial in 0..50 {
        let n = rng.gen_range(2..=7);
        let a = random::matrix_system(&mut rng, n, 0.4);
        let b = loop {
            let b = random::matrix_system(&mut rng, n, 0.4);
            if degree_sequence(&a) != degree_sequence(&b) {
                break b;
            }
        };
        ensure(brute_isomorphism(&a, &b).is_none(), || format!("non-iso pair {trial}: brute force finds a map"))?;
        ensure(lib(find_graph_conjugacy_finite(&a, &b))?.is_none(), || format!("non-iso pair {trial}: map found"))?;
        let (wa, wb) = (Wps::Finite(a), Wps::Finite(b));
        for rel in rels {
            let d = lib(decide(&wa, &wb, rel, None, None, DEFAULT_DEPTH))?;
            ensure(d.verdict.fails(), || format!("non-iso pair {trial}: {} is {}", rel.name(), d.verdict.name()))?;
        }
    }
    Ok("50 relabeled pairs hold all three relations; 50 non-isomorphic pairs fail all three".into())
}

fn c4_correspondence_identities() -> Outcome {
    let mut rng = random::rng(4);
    for trial in 0..100 {
        let sys = random::finite_system(&mut rng, 6, 4);
        let qv = Quiver::new(&sys);
        let (xi, eta) = (corr(&mut rng, &qv), corr(&mut rng, &qv));
        let n = qv.points;
        let (f, g, h, k) = (complex_vec(&mut rng, n), complex_vec(&mut rng, n), complex_vec(&mut rng, n), complex_vec(&mut rng, n));

        // ⟨f⊙g, h⊙k⟩ = ḡ·P(f̄h)·k with P the positive operator of the system
        let fh: Vec<Cq> = f.iter().zip(&h).map(|(a, b)| a.conj() * b).collect();
        let p_re = lib(sys.positive_operator(&fh.iter().map(|z| z.re.clone()).collect::<Vec<_>>()))?;
        let p_im = lib(sys.positive_operator(&fh.iter().map(|z| z.im.clone()).collect::<Vec<_>>()))?;
        let lhs = lib(inner_product(&qv, &CorrElement::simple(&qv, &f, &g), &CorrElement::simple(&qv, &h, &k)))?;
        for x in 0..n {
            let rhs = g[x].conj() * Cq::new(p_re[x].clone(), p_im[x].clone()) * &k[x];
            ensure(lhs[x] == rhs, || format!("system {trial}: GNS identity fails at {x}"))?;
        }

        let ip = lib(inner_product(&qv, &xi, &eta))?;
        let (nx, ne) = (lib(inner_product(&qv, &xi, &xi))?, lib(inner_product(&qv, &eta, &eta))?);
        for x in 0..n {
            ensure(abs_sq(&ip[x]) <= &nx[x].re * &ne[x].re, || format!("system {trial}: Cauchy–Schwarz fails at {x}"))?;
        }

        let one: Vec<Cq> = vec![real(int(1)); n];
        let fbar: Vec<Cq> = f.iter().map(|z| z.conj()).collect();
        let left = lib(inner_product(&qv, &lib(module_action(&qv, &f, &xi, &one))?, &eta))?;
        let right = lib(inner_product(&qv, &xi, &lib(module_action(&qv, &fbar, &eta, &one))?))?;
        ensure(left == right, || format!("system {trial}: ⟨fξ,η⟩ ≠ ⟨ξ,f̄η⟩"))?;
        let ip_right = lib(inner_product(&qv, &xi, &lib(module_action(&qv, &one, &eta, &f))?))?;
        ensure(ip_right.iter().zip(&ip).zip(&f).all(|((a, b), c)| *a == b * c), || {
            format!("system {trial}: ⟨ξ,ηf⟩ ≠ ⟨ξ,η⟩f")
        })?;

        let p2 = lib(paths(&qv, 2))?;
        for path in &p2.paths {
            ensure(path_weight(&qv, path) == &qv.weights[path[0]] * &qv.weights[path[1]], || {
                format!("system {trial}: path weight is not multiplicative")
            })?;
        }
        // balanced tensor and ⟨ξ⊗η, ξ'⊗η'⟩ = ⟨η, ⟨ξ,ξ'⟩·η'⟩
        let t1 = lib(tensor(&qv, &p2, &[&eta, &lib(module_action(&qv, &one, &xi, &f))?]))?;
        let t2 = lib(tensor(&qv, &p2, &[&lib(module_action(&qv, &f, &eta, &one))?, &xi]))?;
        ensure(t1 == t2, || format!("system {trial}: ξf⊗η ≠ ξ⊗fη"))?;
        let (xi2, eta2) = (corr(&mut rng, &qv), corr(&mut rng, &qv));
        let tt = lib(tensor(&qv, &p2, &[&eta2, &xi2]))?;
        let lhs = path_inner_product(&qv, &p2, &lib(tensor(&qv, &p2, &[&eta, &xi]))?, &tt);
        let inner = lib(inner_product(&qv, &xi, &xi2))?;
        let rhs = lib(inner_product(&qv, &eta, &lib(module_action(&qv, &inner, &eta2, &one))?))?;
        ensure(lhs == rhs, || format!("system {trial}: tensor inner product identity fails"))?;

        let wmax = qv.weights.iter().max().cloned().unwrap_or_else(|| int(1));
        let wmin = qv.weights.iter().min().cloned().unwrap_or_else(|| int(1));
        let c = wmax.max(wmin.recip()).max(int(1));
        let (ns, sup) = (lib(norm_sq(&qv, &xi))?, sup_norm_sq(&xi));
        ensure(&sup / &c <= ns && ns <= int(qv.d as i64) * &c * &sup, || {
            format!("system {trial}: norm sandwich fails (C = {c}, d = {})", qv.d)
        })?;
    }
    Ok("GNS, Cauchy–Schwarz, balancing, path weights, tensor inner product and norm sandwich exact on 100 systems".into())
}

fn c5_tensor_powers() -> Outcome {
    let mut rng = random::rng(5);
    let (mut bounded, mut unbounded) = (0, 0);
    for trial in 0..20 {
        let sys = random::finite_system(&mut rng, 5, 3);
        let qv = Quiver::new(&sys);
        let phi: Vec<Rational> = (0..qv.points).map(|_| random::positive_rational(&mut rng)).collect();
        let u: Vec<Rational> = qv.edges.iter().map(|_| random::positive_rational(&mut rng)).collect();
        let h: Vec<Rational> = qv
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(r, s))| {
                let bump = match rng.gen_range(0..5) {
                    0 => q("1/2"),
                    1 => int(2),
                    _ => int(1),
                };
                &qv.weights[k] / &u[k] * &phi[r] / &phi[s] * bump
            })
            .collect();
        let v = lib(Multiplier::new(qv.clone(), u, h))?;
        for (k, f) in v.factor.iter().enumerate() {
            let mut delta = CorrElement::constant(&qv, real(Rational::zero()));
            delta.values[k] = real(int(1));
            let ratio = lib(v.image_norm_sq(&delta))? / lib(norm_sq(&qv, &delta))?;
            ensure(ratio == *f, || format!("multiplier {trial}: ‖Vδ‖²/‖δ‖² ≠ factor on edge {k}"))?;
        }
        let best = path_products(&qv, &v.factor, 12);
        for n in 0..=12 {
            let lib_n = tensor_power_norm_sq(&v, n);
            let oracle = max_at_length(&best, n);
            ensure(lib_n == oracle, || format!("multiplier {trial}: ‖V^⊗{n}‖² = {lib_n}, oracle {oracle}"))?;
            for m in 0..=12 - n {
                ensure(
                    tensor_power_norm_sq(&v, n + m) <= tensor_power_norm_sq(&v, n) * tensor_power_norm_sq(&v, m),
                    || format!("multiplier {trial}: not submultiplicative at {n}+{m}"),
                )?;
            }
        }
        match (is_tensor_power_bounded(&v), oracle_sup(&qv, &v.factor)) {
            (PowerBound::Bounded { sup }, Some(o)) => {
                let seen = (0..=12).map(|n| max_at_length(&best, n)).max().expect("n = 0 is present");
                ensure(sup == o && sup == seen, || format!("multiplier {trial}: sup {sup}, oracle {o}, DP {seen}"))?;
                bounded += 1;
            }
            (PowerBound::Unbounded { cycle, product }, None) => {
                let closed = cycle.iter().zip(cycle.iter().cycle().skip(1)).all(|(&e, &f)| qv.edges[e].0 == qv.edges[f].1);
                let prod: Rational = cycle.iter().map(|&e| v.factor[e].clone()).product();
                ensure(closed && prod == product && product > int(1), || format!("multiplier {trial}: bad pumping cycle"))?;
                let len = cycle.len();
                for j in 1..=12 / len {
                    ensure(max_at_length(&best, j * len) >= num_traits::pow(product.clone(), j), || {
                        format!("multiplier {trial}: DP below the pumped product")
                    })?;
                }
                unbounded += 1;
            }
            (got, o) => return Err(format!("multiplier {trial}: library {got:?}, oracle {o:?}")),
        }
    }

    // certificates on relabeled pairs: C is accepted exactly when both sups fit
    let (mut accepted, mut rejected) = (0, 0);
    for trial in 0..20 {
        let a = random::finite_system(&mut rng, 5, 3);
        let perm = random::permutation(&mut rng, a.len());
        let b = random::relabel_reweight(&mut rng, &a, &perm);
        let qa = Quiver::new(&a);
        let hs: BTreeMap<(usize, usize), Rational> = qa
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(r, s))| {
                let u = raw_finite_weight(&b, perm[r], perm[s]);
                let bump = [q("1/2"), int(1), int(1), int(2)][rng.gen_range(0..4)].clone();
                ((r, s), &qa.weights[k] / u * bump)
            })
            .collect();
        let c = int([1, 2, 4, 8][rng.gen_range(0..4)]);
        let cert = Certificate { gamma: Gamma::Bijection(perm.clone()), h: Gap::Edges(hs.clone()), c: c.clone() };
        let (wa, wb) = (Wps::Finite(a.clone()), Wps::Finite(b.clone()));
        let verdict = lib(verify_weighted_orbit_certificate(&wa, &wb, &cert, DEFAULT_DEPTH))?;
        let factor: Vec<Rational> = qa
            .edges
            .iter()
            .map(|&(r, s)| &hs[&(r, s)] * raw_finite_weight(&b, perm[r], perm[s]) / raw_finite_weight(&a, r, s))
            .collect();
        let inverse: Vec<Rational> = factor.iter().map(Rational::recip).collect();
        let fits = |s: Option<Rational>| s.is_some_and(|s| s <= c);
        let expect = fits(oracle_sup(&qa, &factor)) && fits(oracle_sup(&qa, &inverse));
        ensure(verdict.holds() == expect && verdict.fails() != expect, || {
            format!("bridge {trial}: verdict {} but oracle says {expect}", verdict.name())
        })?;
        let v = lib(multiplier_from_certificate(&wa, &wb, &cert))?;
        ensure(v.factor == factor, || format!("bridge {trial}: multiplier factors differ"))?;
        if expect {
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!(
        "{bounded} bounded / {unbounded} unbounded multipliers match the DP for n ≤ 12; certificates {accepted} accepted, {rejected} rejected as predicted"
    ))
}

fn fock_instance(rng: &mut impl Rng) -> FiniteSystem {
    random::finite_system(rng, 3, 2)
}

fn c6_fock() -> Outcome {
    let mut rng = random::rng(6);
    let mut worst_gauge: f64 = 0.0;
    let mut worst_band: f64 = 0.0;
    for trial in 0..10 {
        let qv = Quiver::new(&fock_instance(&mut rng));
        let space = lib(FockSpace::new(&qv, 4))?;
        let t = random::element(&mut rng, &space);
        let m = lib(matrix(&space, &t))?.to_float();
        let scale = max_entry(&m).max(1.0);
        for n in 0..=space.level {
            let exact = t.fourier(n);
            ensure(exact.fourier(n) == exact, || format!("element {trial}: Φ_{n} is not idempotent"))?;
            ensure(exact.fourier(n + 1).coeffs.is_empty(), || format!("element {trial}: Φ_{}Φ_{n} ≠ 0", n + 1))?;
            let by_gauge = m.fourier_by_gauge(&space, n as i32);
            let direct = lib(matrix(&space, &exact))?.to_float();
            worst_gauge = worst_gauge.max(by_gauge.max_abs_diff(&direct) / scale);
            let twice = by_gauge.fourier_by_gauge(&space, n as i32);
            worst_gauge = worst_gauge.max(twice.max_abs_diff(&by_gauge) / scale);
            let other = by_gauge.fourier_by_gauge(&space, n as i32 + 1);
            worst_gauge = worst_gauge.max(other.max_abs_diff(&zero_matrix_like(&m)) / scale);
            let lambda = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let lhs = m.gauge(&space, lambda).fourier_by_gauge(&space, n as i32);
            let rhs = FockMatrix { fibers: by_gauge.fibers.iter().map(|f| f * lambda.powu(n as u32)).collect() };
            worst_gauge = worst_gauge.max(lhs.max_abs_diff(&rhs) / scale);
            let via_coeffs = lib(matrix(&space, &t.to_float().gauge(lambda)))?;
            worst_gauge = worst_gauge.max(via_coeffs.max_abs_diff(&m.gauge(&space, lambda)) / scale);
        }
        let negative = m.fourier_by_gauge(&space, -1);
        worst_gauge = worst_gauge.max(negative.max_abs_diff(&zero_matrix_like(&m)) / scale);

        for k in 0..=space.level + 1 {
            let c = cesaro(&t, k);
            for (&n, xi) in &t.coeffs {
                let expect: Option<Vec<Cq>> = (n <= k).then(|| {
                    let f = Rational::new(((k + 1 - n) as i64).into(), ((k + 1) as i64).into());
                    xi.iter().map(|v| v * real(f.clone())).collect()
                });
                ensure(c.coeffs.get(&n).cloned() == expect, || format!("element {trial}: Cesàro σ_{k} wrong at degree {n}"))?;
            }
            // σ_K as the Fejér-weighted gauge average over enough roots of unity
            let roots = 2 * (space.level + k) + 1;
            let mut avg = zero_matrix_like(&m);
            for j in 0..roots {
                let omega = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / roots as f64);
                let g = m.gauge(&space, omega);
                let wgt = fejer_kernel(k, omega.conj()) / roots as f64;
                for (acc, f) in avg.fibers.iter_mut().zip(&g.fibers) {
                    *acc += f * wgt;
                }
            }
            let exact = lib(matrix(&space, &c))?.to_float();
            worst_gauge = worst_gauge.max(avg.max_abs_diff(&exact) / scale);
        }

        for n in 1..=space.level {
            if space.spaces[n].paths.is_empty() {
                continue;
            }
            let xi: Vec<Cq> = complex_vec(&mut rng, space.spaces[n].paths.len());
            let band = FourierElement::band(space.level, n, xi.clone());
            let op = lib(op_norm(&space, &band))?;
            let module = to_f64(&path_norm_sq(&qv, &space.spaces[n], &wps::correspondence::PathFunction { values: xi })).sqrt();
            worst_band = worst_band.max((op - module).abs() / module.max(1.0));
        }
    }
    ensure(worst_gauge <= GAUGE_TOL, || format!("gauge/Fourier deviation {worst_gauge:.2e}"))?;
    ensure(worst_band <= BAND_TOL, || format!("band norm deviation {worst_band:.2e}"))?;

    let mut worst_ratio: f64 = 0.0;
    for trial in 0..20 {
        let qv = Quiver::new(&fock_instance(&mut rng));
        let v = coboundary_multiplier(&mut rng, &qv);
        let (PowerBound::Bounded { sup: s1 }, PowerBound::Bounded { sup: s2 }) =
            (is_tensor_power_bounded(&v), is_tensor_power_bounded(&v.inverse()))
        else {
            return Err(format!("instance {trial}: coboundary multiplier is unbounded"));
        };
        let bound_factor = (to_f64(&s1) * to_f64(&s2)).sqrt();
        for level in [6, 8] {
            let space = lib(FockSpace::new(&qv, level))?;
            let t = random::element(&mut rng, &space);
            let norm = lib(op_norm(&space, &t))?;
            let image = lib(op_norm_weighted(&space, &v.target_weights, &lib(ad_v(&space, &t, &v))?))?;
            let bound = bound_factor * norm;
            ensure(image <= bound * (1.0 + ADV_TOL) + ADV_TOL, || {
                format!("instance {trial} at N = {level}: ‖Ad_V T‖ = {image} > {bound}")
            })?;
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(image / bound);
            }
        }
    }
    Ok(format!(
        "Fourier/gauge deviation {worst_gauge:.1e}, band norm deviation {worst_band:.1e}, Ad_V within bound on 20 instances at N = 6 and 8 (max ratio {worst_ratio:.3})"
    ))
}

fn c7_characters() -> Outcome {
    let mut checked = 0;
    for e in corpus::entries() {
        for sys in [&e.a, &e.b] {
            let discs = lib(disc_data(sys))?;
            for d in &discs.discs {
                let oracle = match (sys, &d.point) {
                    (Wps::Finite(s), Pt::Atom(x)) => raw_finite_weight(s, *x, *x),
                    (Wps::Interval(s), Pt::Real(x)) => raw_interval_weight(s, x, x),
                    _ => return Err("point of the wrong kind".into()),
                };
                ensure(d.radius_sq == oracle, || format!("{}: radius² at {} is {}, oracle {oracle}", e.name, d.point, d.radius_sq))?;
                checked += 1;
            }
            if let (Wps::Interval(s), Subset::Reals(set)) = (sys, sys.fixed_points()) {
                for part in set.parts().iter().filter(|p| p.lo != p.hi) {
                    let x = part.midpoint();
                    let r = lib(radius_sq_at(sys, &Pt::Real(x.clone())))?;
                    ensure(r == raw_interval_weight(s, &x, &x), || format!("{}: radius² on a fixed interval", e.name))?;
                    checked += 1;
                }
            }
        }
    }

    let mut rng = random::rng(7);
    let mut worst_theta: f64 = 0.0;
    let mut instances = 0;
    while instances < 20 {
        let sys = random::finite_system(&mut rng, 3, 2);
        let fixed: Vec<usize> = sys.fixed_points().into_iter().collect();
        if fixed.is_empty() {
            continue;
        }
        instances += 1;
        let qv = Quiver::new(&sys);
        let space = lib(FockSpace::new(&qv, 6))?;
        let half = |mut t: FourierElement| {
            t.coeffs.retain(|&n, _| n <= 3);
            t
        };
        let (t, u) = (half(random::element(&mut rng, &space)), half(random::element(&mut rng, &space)));
        let tu = lib(series_product(&space, &t, &u))?;
        for &x in &fixed {
            let r = to_f64(&raw_finite_weight(&sys, x, x)).sqrt();
            let z = Complex64::from_polar(r * rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let (a, b, ab) = (
                lib(eval_character(&space, &t, x, z))?,
                lib(eval_character(&space, &u, x, z))?,
                lib(eval_character(&space, &tu, x, z))?,
            );
            worst_theta = worst_theta.max((ab - a * b).norm() / (1.0 + a.norm() * b.norm()));
        }
    }
    ensure(worst_theta <= THETA_TOL, || format!("θ multiplicativity deviation {worst_theta:.2e}"))?;

    let mut worst_zero: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    for _ in 0..100 {
        let f = random::mobius(&mut rng, 0.95);
        worst_zero = worst_zero.max(lib(zeroing_residual(&f))?);
        let z = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let back = lib(f.invert().apply(lib(f.apply(z))?))?;
        worst_pair = worst_pair.max((back - z).norm());
    }
    for k in 0..100 {
        let h = k as f64 / 100.0;
        let (lambda, gamma) = lib(solve_zeroing_pair(h))?;
        worst_pair = worst_pair
            .max((lambda.norm() - 1.0).abs())
            .max((gamma.norm() - 1.0).abs())
            .max((lambda * (gamma - h) - (gamma - 1.0)).norm());
        let w = Complex64::from_polar(h.sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let f = lib(Mobius::new(rng.gen_range(0.0..std::f64::consts::TAU), w))?;
        worst_zero = worst_zero.max(lib(zeroing_residual(&f))?);
    }
    ensure(worst_zero <= ZEROING_TOL, || format!("zeroing residual {worst_zero:.2e}"))?;
    ensure(worst_pair <= PAIR_TOL, || format!("λ–γ relation deviation {worst_pair:.2e}"))?;
    Ok(format!(
        "{checked} disc radii exact; θ deviation {worst_theta:.1e}; zeroing residual {worst_zero:.1e}; λ–γ deviation {worst_pair:.1e}"
    ))
}

fn reflection() -> Gamma {
    let comps = vec![Interval { lo: int(0), hi: int(1) }];
    Gamma::Pl(
        PlFunc::new(&comps, BTreeMap::from([(0, vec![(int(0), int(1)), (int(1), int(0))])])).expect("reflection"),
    )
}

/// `(consistent, inconclusive verdicts)`.
fn hierarchy(a: &Wps, b: &Wps, gamma: Option<&Gamma>) -> Result<(bool, usize), String> {
    let v = |rel| lib(decide(a, b, rel, gamma, None, DEFAULT_DEPTH)).map(|d| d.verdict);
    let (graph, btc, woc) = (v(Relation::Graph)?, v(Relation::BranchTransition)?, v(Relation::WeightedOrbit)?);
    let unit_certificate = match (&btc, &woc) {
        (Verdict::Holds { .. }, Verdict::Holds { certificate: Some(c), .. }) => c.c == int(1),
        (Verdict::Holds { .. }, _) => false,
        _ => true,
    };
    let undecided = [&graph, &btc, &woc].iter().filter(|v| matches!(v, Verdict::Inconclusive { .. })).count();
    Ok(((!btc.holds() || woc.holds()) && (!woc.holds() || graph.holds()) && unit_certificate, undecided))
}

fn c8_hierarchy() -> Outcome {
    let mut total = 0;
    let mut undecided = 0;
    for e in corpus::entries() {
        let (ok, u) = hierarchy(&e.a, &e.b, e.gamma.as_ref())?;
        ensure(ok, || format!("corpus entry {} breaks the hierarchy", e.name))?;
        total += 1;
        undecided += u;
    }
    let mut rng = random::rng(8);
    for trial in 0..50 {
        let a = random::finite_system(&mut rng, 5, 3);
        let b = if rng.gen_bool(0.5) {
            let perm = random::permutation(&mut rng, a.len());
            random::relabel_reweight(&mut rng, &a, &perm)
        } else {
            random::finite_system(&mut rng, 5, 3)
        };
        let (ok, u) = hierarchy(&Wps::Finite(a), &Wps::Finite(b), None)?;
        ensure(ok, || format!("finite pair {trial} breaks the hierarchy"))?;
        total += 1;
        undecided += u;
    }
    let mirror = reflection();
    for trial in 0..50 {
        let a = random::interval_system(&mut rng);
        let (b, gamma) = if rng.gen_bool(0.5) {
            (random::reflect_reweight(&mut rng, &a), Some(&mirror))
        } else {
            (random::interval_system(&mut rng), None)
        };
        let (ok, u) = hierarchy(&Wps::Interval(a), &Wps::Interval(b), gamma)?;
        ensure(ok, || format!("interval pair {trial} breaks the hierarchy"))?;
        total += 1;
        undecided += u;
    }
    Ok(format!("BTC ⟹ WOC (C = 1) ⟹ graph on {total} pairs; {undecided} inconclusive verdicts (no candidate homeomorphism, or a certificate needed)"))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "branch transition example", s(1), c1_branch_transition),
        criterion(2, "different invariants", s(10), c2_different_invariants),
        criterion(3, "finite collapse", s(30), c3_finite_collapse),
        criterion(4, "correspondence identities", s(30), c4_correspondence_identities),
        criterion(5, "tensor powers and certificates", s(30), c5_tensor_powers),
        criterion(6, "Fock representation", s(60), c6_fock),
        criterion(7, "characters and disc automorphisms", s(5), c7_characters),
        criterion(8, "hierarchy", s(60), c8_hierarchy),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
