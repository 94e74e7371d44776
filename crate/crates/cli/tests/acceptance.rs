//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use kdyn_core::lattice::{hermite_columns, smith_normal_form, IntMatrix};

type Mat = Vec<Vec<i64>>;

// ------------------------------------------------------------ plumbing

struct Kdyn {
    dir: tempfile::TempDir,
    counter: std::cell::Cell<usize>,
}

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or(Value::Null)
    }

    fn lines(&self) -> Vec<Value> {
        self.stdout
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).unwrap_or(Value::Null))
            .collect()
    }
}

impl Kdyn {
    fn new() -> Self {
        Kdyn {
            dir: tempfile::tempdir().expect("temp dir"),
            counter: std::cell::Cell::new(0),
        }
    }

    fn write(&self, v: &Value) -> PathBuf {
        let n = self.counter.get();
        self.counter.set(n + 1);
        let p = self.dir.path().join(format!("doc{n}.json"));
        std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
        p
    }

    fn run<S: AsRef<std::ffi::OsStr>>(&self, args: &[S]) -> Run {
        let out = Command::new(env!("CARGO_BIN_EXE_kdyn"))
            .args(args)
            .env_remove("KDYN_DEADLINE_SECS")
            .output()
            .expect("kdyn runs");
        Run {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        }
    }

    /// Runs a certificate command, then `verify` on its output.
    fn certify(&self, args: &[&str], instance: &Path) -> (Run, bool) {
        let r = self.run(args);
        let cert = self.dir.path().join(format!("cert{}.json", self.counter.get()));
        self.counter.set(self.counter.get() + 1);
        std::fs::write(&cert, &r.stdout).unwrap();
        let v = self.run(&[
            "verify".as_ref(),
            cert.as_os_str(),
            instance.as_os_str(),
        ]);
        (r, v.code == 0)
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn rat(v: &Value) -> BigRational {
    match v {
        Value::String(s) => s.parse().expect("rational"),
        Value::Number(n) => BigRational::from_integer(BigInt::from(n.as_i64().expect("int"))),
        _ => panic!("not a rational: {v}"),
    }
}

fn rats(v: &Value) -> Vec<BigRational> {
    v.as_array().map(|a| a.iter().map(rat).collect()).unwrap_or_default()
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn dot(f: &[BigRational], x: &[i64]) -> BigRational {
    f.iter().zip(x).fold(BigRational::zero(), |acc, (a, b)| acc + a * q(*b))
}

fn ints(v: &Value) -> Vec<i64> {
    v.as_array()
        .map(|a| a.iter().map(|x| x.as_i64().expect("small int")).collect())
        .unwrap_or_default()
}

// ------------------------------------------------------------ instances

#[derive(Clone, Debug)]
struct Instance {
    d: usize,
    /// `None` means the simplicial cone.
    cone: Option<Vec<Vec<i64>>>,
    unit: Vec<i64>,
    torsion: Vec<i64>,
    maps: Vec<Mat>,
}

impl Instance {
    fn group_json(&self) -> Value {
        let cone = match &self.cone {
            None => json!({"type": "simplicial"}),
            Some(gs) => json!({
                "type": "generators",
                "generators": gs.iter().map(|g| json!({"free": g, "torsion": vec![0; self.torsion.len()]})).collect::<Vec<_>>(),
            }),
        };
        json!({
            "schema": "kdyn/1", "kind": "group", "free_rank": self.d, "torsion": self.torsion,
            "cone": cone, "unit": {"free": self.unit, "torsion": vec![0; self.torsion.len()]},
        })
    }

    fn action_json(&self) -> Value {
        json!({"schema": "kdyn/1", "kind": "action", "group": self.group_json(), "generators": self.maps})
    }

    fn endo_json(&self) -> Value {
        json!({"schema": "kdyn/1", "kind": "endomorphism", "group": self.group_json(), "matrix": self.maps[0]})
    }

    /// Facet normals of the positive cone (the coordinate functionals for
    /// the simplicial cone).
    fn facets(&self) -> Vec<Vec<i128>> {
        match &self.cone {
            None => (0..self.d)
                .map(|i| (0..self.d).map(|j| i128::from(i == j)).collect())
                .collect(),
            Some(gs) => facets_of(gs, self.d),
        }
    }
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn mat_vec(a: &Mat, x: &[i64]) -> Vec<i64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect()
}

fn det(m: &[Vec<i128>]) -> i128 {
    // fraction-free Bareiss elimination
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Facets of the full-dimensional cone spanned by `gens`, by checking every
/// `(d−1)`-subset's normal.
fn facets_of(gens: &[Vec<i64>], d: usize) -> Vec<Vec<i128>> {
    let mut out: Vec<Vec<i128>> = Vec::new();
    let n = gens.len();
    let mut subset: Vec<usize> = (0..d - 1).collect();
    loop {
        // normal by cofactors
        let normal: Vec<i128> = (0..d)
            .map(|c| {
                let minor: Vec<Vec<i128>> = subset
                    .iter()
                    .map(|&s| (0..d).filter(|&j| j != c).map(|j| i128::from(gens[s][j])).collect())
                    .collect();
                let m = det(&minor);
                if c % 2 == 0 {
                    m
                } else {
                    -m
                }
            })
            .collect();
        if normal.iter().any(|&x| x != 0) {
            let vals: Vec<i128> = gens
                .iter()
                .map(|g| g.iter().zip(&normal).map(|(a, b)| i128::from(*a) * b).sum())
                .collect();
            let cand = if vals.iter().all(|&v| v >= 0) {
                Some(normal.clone())
            } else if vals.iter().all(|&v| v <= 0) {
                Some(normal.iter().map(|x| -x).collect())
            } else {
                None
            };
            if let Some(mut f) = cand {
                let g = f.iter().fold(0i128, |acc, &x| gcd(acc, x));
                f.iter_mut().for_each(|x| *x /= g);
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        // next subset
        let mut i = d - 1;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if subset[i] < n - (d - 1) + i {
                subset[i] += 1;
                for j in i + 1..d - 1 {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
        if d == 1 {
            return out;
        }
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Brute force: a nonzero positive element of `H_σ` with all coordinates
/// in `[−bound, bound]`, if one exists.
fn brute_force(inst: &Instance, bound: i128) -> Option<Vec<i128>> {
    let d = inst.d;
    let mut rows: Vec<Vec<i128>> = Vec::new();
    for m in &inst.maps {
        for k in 0..d {
            rows.push((0..d).map(|i| i128::from(i == k) - i128::from(m[i][k])).collect());
        }
    }
    // integer row echelon form
    let mut basis: Vec<Vec<i128>> = Vec::new();
    let mut pivots = Vec::new();
    let mut col = 0;
    while col < d && !rows.is_empty() {
        loop {
            rows.retain(|r| r.iter().any(|&x| x != 0));
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    let mut r = rows.remove(i);
                    if r[col] < 0 {
                        r.iter_mut().for_each(|x| *x = -*x);
                    }
                    basis.push(r);
                    pivots.push(col);
                }
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            let pr = rows[p].clone();
            for &i in &nz {
                if i != p {
                    let f = rows[i][col] / pr[col];
                    for j in 0..d {
                        rows[i][j] -= f * pr[j];
                    }
                }
            }
        }
        col += 1;
    }
    let facets = inst.facets();
    let simplicial = inst.cone.is_none();
    let mut point = vec![0i128; d];
    search(&basis, &pivots, 0, &mut point, bound, simplicial, &facets)
}

fn search(
    basis: &[Vec<i128>],
    pivots: &[usize],
    i: usize,
    point: &mut Vec<i128>,
    bound: i128,
    simplicial: bool,
    facets: &[Vec<i128>],
) -> Option<Vec<i128>> {
    if i == basis.len() {
        let ok = point.iter().any(|&x| x != 0)
            && point.iter().all(|x| x.abs() <= bound)
            && facets
                .iter()
                .all(|f| f.iter().zip(point.iter()).map(|(a, b)| a * b).sum::<i128>() >= 0);
        return if ok { Some(point.clone()) } else { None };
    }
    let p = pivots[i];
    let piv = basis[i][p];
    let lo = if simplicial { 0 } else { -bound };
    // coordinate p becomes point[p] + c·piv, which must land in [lo, bound]
    let cmin = ceil_div(lo - point[p], piv);
    let cmax = floor_div(bound - point[p], piv);
    for c in cmin..=cmax {
        for (x, b) in point.iter_mut().zip(&basis[i]) {
            *x += c * b;
        }
        let found = search(basis, pivots, i + 1, point, bound, simplicial, facets);
        for (x, b) in point.iter_mut().zip(&basis[i]) {
            *x -= c * b;
        }
        if found.is_some() {
            return found;
        }
    }
    None
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

/// `e_i += e_j` steps followed by a permutation: unimodular and nonnegative.
fn random_positive_unimodular(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let mut m = identity(d);
    for _ in 0..rng.gen_range(0..=3) {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i != j {
            let mut e = identity(d);
            e[i][j] = 1;
            m = mat_mul(&e, &m);
        }
    }
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p: Mat = (0..d).map(|i| (0..d).map(|j| i64::from(perm[i] == j)).collect()).collect();
    mat_mul(&p, &m)
}

fn random_unimodular(rng: &mut ChaCha8Rng, d: usize) -> (Mat, Mat) {
    let mut m = identity(d);
    let mut inv = identity(d);
    for _ in 0..rng.gen_range(1..=3) {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i == j {
            continue;
        }
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut e = identity(d);
        e[i][j] = s;
        let mut einv = identity(d);
        einv[i][j] = -s;
        m = mat_mul(&e, &m);
        inv = mat_mul(&inv, &einv);
    }
    (m, inv)
}

fn small(m: &Mat) -> bool {
    m.iter().flatten().all(|x| x.abs() <= 3)
}

/// A nonzero vector in `[0, 3]^d` fixed by every map.
fn common_fixed(maps: &[Mat], d: usize) -> Option<Vec<i64>> {
    (1..4usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let v = (k % 4) as i64;
                    k /= 4;
                    v
                })
                .collect::<Vec<_>>()
        })
        .find(|x| maps.iter().all(|m| &mat_vec(m, x) == x))
}

fn pyramid_maps() -> Vec<Mat> {
    let r = vec![vec![0, -1, 0], vec![1, 0, 0], vec![0, 0, 1]];
    let f = vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]];
    let s = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]];
    vec![identity(3), r.clone(), f.clone(), s, mat_mul(&r, &r), mat_mul(&r, &f)]
}

fn validates(inst: &Instance) -> bool {
    let doc = inst.action_json();
    match kdyn_core::schema::action_of(&doc, "") {
        Ok((g, a)) => g.validate_structure().is_ok() && kdyn_core::dynamics::validate_action(&a, &g).is_ok(),
        Err(_) => false,
    }
}

fn action_suite(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut k = 0usize;
    while out.len() < count {
        k += 1;
        let family = k % 3;
        let inst = match family {
            // simplicial cone
            0 => {
                let d = rng.gen_range(1..=5);
                let r = rng.gen_range(1..=3);
                let maps: Vec<Mat> = (0..r).map(|_| random_positive_unimodular(&mut rng, d)).collect();
                let Some(unit) = common_fixed(&maps, d) else { continue };
                Instance {
                    d,
                    cone: None,
                    unit,
                    torsion: vec![],
                    maps,
                }
            }
            // simplicial cone in a skewed basis
            1 => {
                let d = rng.gen_range(2..=5);
                let r = rng.gen_range(1..=3);
                let base: Vec<Mat> = (0..r).map(|_| random_positive_unimodular(&mut rng, d)).collect();
                let Some(u) = common_fixed(&base, d) else { continue };
                let (qm, qi) = random_unimodular(&mut rng, d);
                let maps: Vec<Mat> = base.iter().map(|a| mat_mul(&mat_mul(&qm, a), &qi)).collect();
                let cone: Vec<Vec<i64>> = (0..d).map(|j| (0..d).map(|i| qm[i][j]).collect()).collect();
                Instance {
                    d,
                    cone: Some(cone),
                    unit: mat_vec(&qm, &u),
                    torsion: vec![],
                    maps,
                }
            }
            // square pyramid with its symmetries and a few shears
            _ => {
                let pool = pyramid_maps();
                let r = rng.gen_range(1..=3);
                let maps: Vec<Mat> = (0..r).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
                Instance {
                    d: 3,
                    cone: Some(vec![vec![1, 0, 1], vec![0, 1, 1], vec![-1, 0, 1], vec![0, -1, 1]]),
                    unit: vec![0, 0, 1],
                    torsion: vec![],
                    maps,
                }
            }
        };
        if inst.maps.iter().all(small) && validates(&inst) {
            out.push(inst);
        }
    }
    out
}

// ------------------------------------------------------------ criteria

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct Suite {
    instances: Vec<Instance>,
    verdicts: Vec<(i32, Value)>,
}

fn criterion1(k: &Kdyn, suite: &mut Suite) -> Outcome {
    let start = Instant::now();
    let mut passed = 0;
    let mut holds = 0;
    for inst in &suite.instances {
        let path = k.write(&inst.action_json());
        let (r, ok) = k.certify(&["check-coboundary", path.to_str().unwrap()], &path);
        if ok && (r.code == 0 || r.code == 3) {
            passed += 1;
        }
        if r.code == 0 {
            holds += 1;
        }
        suite.verdicts.push((r.code, r.json()));
    }
    let elapsed = start.elapsed();
    let n = suite.instances.len();
    ensure(passed == n, format!("{passed}/{n} certificates verified"))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{passed}/{n} verified ({holds} holds, {} fails) in {:.2}s",
        n - holds,
        elapsed.as_secs_f64()
    ))
}

fn criterion2(suite: &Suite) -> Outcome {
    let mut agree = 0;
    let mut disagreements = Vec::new();
    for (i, (inst, (code, cert))) in suite.instances.iter().zip(&suite.verdicts).enumerate() {
        let found = brute_force(inst, 20);
        let ok = match code {
            0 => found.is_none(),
            3 => found.is_some(),
            _ => false,
        };
        if ok {
            agree += 1;
        } else {
            disagreements.push(format!("#{i} exit {code} oracle {found:?} cert {}", cert["verdict"]));
        }
    }
    let n = suite.instances.len();
    ensure(agree == n, format!("{agree}/{n} agree: {}", disagreements.join("; ")))?;
    Ok(format!("{agree}/{n} verdicts agree with the [-20,20] search"))
}

fn criterion3(k: &Kdyn) -> Outcome {
    let f = fixtures();
    let shear = f.join("shear.json");
    let (r, ok) = k.certify(&["check-coboundary", shear.to_str().unwrap()], &shear);
    let v = r.json();
    let h = ints(&v["element"]["free"]);
    ensure(r.code == 3 && ok, format!("shear: exit {} verified {ok}", r.code))?;
    ensure(h.len() == 2 && h[0] > 0 && h[1] == 0, format!("shear element {h:?}"))?;

    let swap = f.join("swap.json");
    let (r, ok) = k.certify(&["check-coboundary", swap.to_str().unwrap()], &swap);
    let fc = rats(&r.json()["functional"]["coefficients"]);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    ensure(r.code == 0 && ok, format!("swap: exit {} verified {ok}", r.code))?;
    ensure(fc == vec![half.clone(), half], format!("swap functional {fc:?}"))?;
    ensure(dot(&fc, &[1, -1]).is_zero() && dot(&fc, &[1, 1]).is_one(), "swap identities")?;

    let id = f.join("identity.json");
    let (r, ok) = k.certify(&["check-coboundary", id.to_str().unwrap()], &id);
    ensure(r.code == 0 && ok, format!("identity: exit {} verified {ok}", r.code))?;

    let tc = f.join("three_cycle.json");
    let (r, ok) = k.certify(&["check-coboundary", tc.to_str().unwrap()], &tc);
    ensure(r.code == 0 && ok, format!("three-cycle: exit {} verified {ok}", r.code))?;
    let (r, ok) = k.certify(&["quotient", tc.to_str().unwrap()], &tc);
    let qv = r.json();
    ensure(r.code == 0 && ok, format!("quotient: exit {} verified {ok}", r.code))?;
    ensure(
        qv["presentation"]["free_rank"] == json!(1)
            && qv["presentation"]["torsion_invariants"] == json!([])
            && ints(&qv["group"]["unit"]["free"]) == vec![3],
        format!("quotient {}", qv["group"]["unit"]),
    )?;
    Ok("shear fails at (h,0), swap gives (1/2,1/2), identity holds, three-cycle quotient is Z with w = 3".into())
}

fn random_group(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let d = rng.gen_range(1..=5);
        let torsion = match rng.gen_range(0..4) {
            0 => vec![],
            1 => vec![2],
            2 => vec![3],
            _ => vec![2, 3],
        };
        let cone = match rng.gen_range(0..3) {
            0 => None,
            1 => {
                let (qm, _) = random_unimodular(rng, d);
                Some((0..d).map(|j| (0..d).map(|i| qm[i][j]).collect()).collect())
            }
            _ => {
                let mut gens: Vec<Vec<i64>> = (0..d)
                    .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
                    .collect();
                for _ in 0..rng.gen_range(1..=3) {
                    let v: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
                    if v.iter().sum::<i64>() > 0 {
                        gens.push(v);
                    }
                }
                Some(gens)
            }
        };
        let unit = match &cone {
            None => vec![1; d],
            Some(gs) => (0..d).map(|i| gs.iter().map(|g| g[i]).sum()).collect(),
        };
        let inst = Instance {
            d,
            cone,
            unit,
            torsion,
            maps: vec![],
        };
        if let Ok(g) = kdyn_core::schema::group_of(&inst.group_json(), "") {
            if g.validate().is_ok() {
                return inst;
            }
        }
    }
}

fn listed_generators(inst: &Instance) -> Vec<Vec<i64>> {
    match &inst.cone {
        None => (0..inst.d).map(|i| (0..inst.d).map(|j| i64::from(i == j)).collect()).collect(),
        Some(gs) => gs.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect(),
    }
}

fn criterion4(k: &Kdyn, groups: &[Instance]) -> Outcome {
    for (i, inst) in groups.iter().enumerate() {
        let path = k.write(&inst.group_json());
        let (r, ok) = k.certify(&["faithful-state", path.to_str().unwrap()], &path);
        ensure(r.code == 0 && ok, format!("group {i}: exit {} verified {ok}", r.code))?;
        let f = rats(&r.json()["functional"]["coefficients"]);
        ensure(f.len() == inst.d, format!("group {i}: functional has {} entries", f.len()))?;
        ensure(dot(&f, &inst.unit).is_one(), format!("group {i}: λ(u) ≠ 1"))?;
        for g in listed_generators(inst) {
            ensure(dot(&f, &g).is_positive(), format!("group {i}: λ({g:?}) ≤ 0"))?;
        }
        // pure torsion elements have zero free part, so λ vanishes on them
        let zero = vec![0; inst.d];
        ensure(dot(&f, &zero).is_zero(), "torsion value")?;
    }
    let with_torsion = groups.iter().filter(|g| !g.torsion.is_empty()).count();
    Ok(format!("{} groups ({with_torsion} with torsion) verified exactly", groups.len()))
}

fn criterion5(k: &Kdyn, groups: &[Instance]) -> Outcome {
    let eps = "1/1000000";
    let f = fixtures();
    let quadrant = f.join("quadrant.json");
    let mut cases: Vec<(PathBuf, Vec<BigRational>, Option<PathBuf>)> = vec![(
        quadrant.clone(),
        vec![BigRational::new(1.into(), 3.into()), BigRational::new(2.into(), 3.into())],
        None,
    )];
    // a faithful state of each random group is itself a valid target
    for inst in groups.iter().take(8) {
        let path = k.write(&inst.group_json());
        let beta = rats(&k.run(&["faithful-state", path.to_str().unwrap()]).json()["functional"]["coefficients"]);
        cases.push((path, beta, None));
    }
    cases.push((
        quadrant,
        vec![BigRational::new(1.into(), 2.into()); 2],
        Some(f.join("swap.json")),
    ));
    for (i, (group, beta, action)) in cases.iter().enumerate() {
        let beta_doc = json!({
            "schema": "kdyn/1", "kind": "state",
            "beta": beta.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        });
        let beta_path = k.write(&beta_doc);
        let mut args = vec![
            "state-preserving".to_string(),
            group.to_str().unwrap().to_string(),
            "--beta".into(),
            beta_path.to_str().unwrap().into(),
            "--eps".into(),
            eps.into(),
        ];
        if let Some(a) = action {
            args.push("--action".into());
            args.push(a.to_str().unwrap().into());
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let instance = action.clone().unwrap_or_else(|| group.clone());
        let (r, ok) = k.certify(&args, &instance);
        ensure(r.code == 0 && ok, format!("case {i}: exit {} verified {ok}", r.code))?;
        let v = r.json();
        let lambda = rats(&v["functional"]["coefficients"]);
        ensure(&lambda == beta, format!("case {i}: λ = {lambda:?}, β = {beta:?}"))?;
        let devs = rats(&v["transcript"]["deviations"]);
        ensure(devs.iter().all(Zero::is_zero), format!("case {i}: deviations {devs:?}"))?;
        if action.is_some() {
            let res: Vec<BigRational> = v["transcript"]["invariance_residuals"]
                .as_array()
                .map(|a| a.iter().flat_map(rats).collect())
                .unwrap_or_default();
            ensure(!res.is_empty() && res.iter().all(Zero::is_zero), format!("residuals {res:?}"))?;
        }
    }
    Ok(format!("{} targets reproduced exactly; swap residuals are 0", cases.len()))
}

fn criterion6(k: &Kdyn) -> Outcome {
    let f = fixtures();
    let o2 = f.join("o2.json");
    let (r, ok) = k.certify(&["pimsner", o2.to_str().unwrap()], &o2);
    ensure(r.code == 3 && ok, format!("(2): exit {} verified {ok}", r.code))?;
    let id = f.join("pimsner_identity.json");
    let (r, ok) = k.certify(&["pimsner", id.to_str().unwrap()], &id);
    ensure(r.code == 0 && ok, format!("identity: exit {} verified {ok}", r.code))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut fails = 0;
    while checked < 20 {
        let d = rng.gen_range(1..=4);
        let h = random_positive_unimodular(&mut rng, d);
        let Some(unit) = common_fixed(std::slice::from_ref(&h), d) else { continue };
        let inst = Instance {
            d,
            cone: None,
            unit,
            torsion: vec![],
            maps: vec![h],
        };
        if !small(&inst.maps[0]) || !validates(&inst) {
            continue;
        }
        let ep = k.write(&inst.endo_json());
        let ap = k.write(&inst.action_json());
        let (p, pok) = k.certify(&["pimsner", ep.to_str().unwrap()], &ep);
        let (c, cok) = k.certify(&["check-coboundary", ap.to_str().unwrap()], &ap);
        ensure(pok && cok, format!("instance {checked}: certificates rejected"))?;
        ensure(
            p.code == c.code && (p.code == 0 || p.code == 3),
            format!("instance {checked}: pimsner exit {} vs coboundary exit {}", p.code, c.code),
        )?;
        if p.code == 3 {
            fails += 1;
        }
        checked += 1;
    }
    Ok(format!("(2) fails, identity holds, 20/20 random agree ({fails} fail branch)"))
}

fn criterion7(k: &Kdyn) -> Outcome {
    let g = fixtures().join("z_plus_z3.json");
    let r = k.run(&["sequence", g.to_str().unwrap(), "--n-max", "25"]);
    ensure(r.code == 0, format!("exit {}", r.code))?;
    let stages = r.lines();
    ensure(stages.len() == 26, format!("{} stages", stages.len()))?;
    for (n, s) in stages.iter().enumerate() {
        ensure(s["index"] == json!(n), format!("stage {n}: index {}", s["index"]))?;
        ensure(
            s["checks"]["additivity"] == json!(true) && s["checks"]["positivity"] == json!(true),
            format!("stage {n}: checks {}", s["checks"]),
        )?;
        let f = rats(&s["functional"]["coefficients"]);
        ensure(f == vec![q(1)], format!("stage {n}: λ = {f:?}"))?;
        let values = rats(&s["values"]);
        for (x, v) in s["elements"].as_array().unwrap().iter().zip(&values) {
            let free = ints(&x["free"]);
            ensure(v == &q(free[0]), format!("stage {n}: λ({x}) = {v}"))?;
        }
    }
    let path = k.dir.path().join("stages.jsonl");
    std::fs::write(&path, &r.stdout).unwrap();
    let v = k.run(&["verify".as_ref(), path.as_os_str(), g.as_os_str()]);
    ensure(v.code == 0, "stage records rejected by verify")?;
    Ok("26 stages, additivity and positivity hold, λ_n(n,t) = n throughout".into())
}

fn criterion8(k: &Kdyn) -> Outcome {
    let mut count = 0;
    for n in 2..=6i64 {
        let ns = n.to_string();
        let cases: [(&[&str], (i64, Vec<i64>, i64, Vec<i64>)); 4] = [
            (&["catalog", "point"], (1, vec![], 0, vec![])),
            (&["catalog", "circle"], (1, vec![], 1, vec![])),
            (&["catalog", "wn", &ns], (1, vec![n], 0, vec![])),
            (&["catalog", "dimension-drop", &ns], (1, vec![], 0, vec![n])),
        ];
        for (args, (f0, t0, f1, t1)) in cases {
            let r = k.run(args);
            ensure(r.code == 0, format!("{args:?}: exit {}", r.code))?;
            let g = r.json();
            let path = k.write(&g);
            let v = k.run(&["validate", path.to_str().unwrap()]);
            ensure(v.code == 0 && v.json()["valid"] == json!(true), format!("{args:?}: not valid"))?;
            let gr = &g["grading"];
            let torsion = ints(&g["torsion"]);
            let k0t = gr["k0_torsion"].as_u64().unwrap() as usize;
            let got = (
                gr["k0_free"].as_i64().unwrap(),
                torsion[..k0t].to_vec(),
                gr["k1_free"].as_i64().unwrap(),
                torsion[k0t..].to_vec(),
            );
            ensure(got == (f0, t0.clone(), f1, t1.clone()), format!("{args:?}: ranks {got:?}"))?;
            ensure(g["free_rank"].as_i64() == Some(f0 + f1), format!("{args:?}: free rank"))?;
            count += 1;
        }
    }
    Ok(format!("{count} building blocks validate and match the K-theory table"))
}

fn bigrat_det(m: &IntMatrix) -> BigRational {
    let n = m.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(m.get(i, j).clone())).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for i in c + 1..n {
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    det
}

fn unimodular(m: &IntMatrix) -> bool {
    bigrat_det(m).abs().is_one()
}

fn criterion9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let start = Instant::now();
    for case in 0..500 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let data: Vec<BigInt> = (0..r * c).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect();
        let m = IntMatrix::from_vec(r, c, data);
        let s = smith_normal_form(&m);
        ensure(s.u.mul(&m).mul(&s.v) == s.d, format!("case {case}: U·M·V ≠ D"))?;
        ensure(unimodular(&s.u) && unimodular(&s.v), format!("case {case}: transforms not unimodular"))?;
        for i in 0..r {
            for j in 0..c {
                ensure(i == j || s.d.get(i, j).is_zero(), format!("case {case}: D not diagonal"))?;
            }
        }
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| s.d.get(i, i).clone()).collect();
        for w in diag.windows(2) {
            let ok = !w[0].is_negative()
                && !w[1].is_negative()
                && if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() };
            ensure(ok, format!("case {case}: divisibility fails on {diag:?}"))?;
        }

        let (h, t, rank) = hermite_columns(&m);
        ensure(m.mul(&t) == h && unimodular(&t), format!("case {case}: HNF transform"))?;
        // shape: positive pivots, zeros above, reduced entries to the left
        let mut pivot_rows = Vec::new();
        for j in 0..rank {
            let i = (0..r).find(|&i| !h.get(i, j).is_zero());
            let Some(i) = i else {
                return Err(format!("case {case}: zero basis column"));
            };
            ensure(h.get(i, j).is_positive(), format!("case {case}: pivot not positive"))?;
            if let Some(&prev) = pivot_rows.last() {
                ensure(i > prev, format!("case {case}: pivots not increasing"))?;
            }
            for l in 0..j {
                let e = h.get(i, l);
                ensure(!e.is_negative() && e < h.get(i, j), format!("case {case}: entry not reduced"))?;
            }
            pivot_rows.push(i);
        }
        for j in rank..c {
            ensure(h.col(j).iter().all(Zero::is_zero), format!("case {case}: trailing column nonzero"))?;
        }
        // canonical: a different generating set of the same lattice
        let mut w = IntMatrix::identity(c);
        for _ in 0..3 {
            let (a, b) = (rng.gen_range(0..c), rng.gen_range(0..c));
            if a != b {
                let mut e = IntMatrix::identity(c);
                e.set(a, b, BigInt::from(rng.gen_range(-2..=2)));
                w = w.mul(&e);
            }
        }
        let (h2, _, _) = hermite_columns(&m.mul(&w));
        ensure(h2 == h, format!("case {case}: HNF not canonical"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("500 instances in {:.2}s", elapsed.as_secs_f64()))
}

fn main() {
    let k = Kdyn::new();
    let mut suite = Suite {
        instances: action_suite(1, 50),
        verdicts: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let groups: Vec<Instance> = (0..20).map(|_| random_group(&mut rng)).collect();

    let titles = [
        "certificate totality",
        "refutation oracle agreement",
        "known instances",
        "faithful functionals",
        "state-preserving functionals",
        "Pimsner condition",
        "stage transcripts",
        "building-block catalog",
        "normal-form properties",
    ];
    let results: Vec<Outcome> = vec![
        criterion1(&k, &mut suite),
        criterion2(&suite),
        criterion3(&k),
        criterion4(&k, &groups),
        criterion5(&k, &groups),
        criterion6(&k),
        criterion7(&k),
        criterion8(&k),
        criterion9(),
    ];
    let mut failed = 0;
    for (i, (title, r)) in titles.iter().zip(&results).enumerate() {
        match r {
            Ok(msg) => println!("criterion {}: PASS {title}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {title}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
