//! JSON instance files and report values.
//!
//! Complex entries are `[re, im]` pairs, exact reals are `"p/q"` strings, and a
//! bare real is accepted wherever a complex entry is expected. Matrices are
//! row-major nested arrays. Errors carry the JSON path of the offending field
//! (and line/column for syntax errors).

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::birkhoff::{make_loop, IndexResult, LoopKind, MatrixLoop};
use crate::cech::{CechPairing, CohomologyReport};
use crate::error::StokesError;
use crate::linalg::HermitianReport;
use crate::matrix::Matrix;
use crate::order::{Direction, Factor};
use crate::pairing::{self, Certificate, InducedForm, KReport, KSpace, SplitResult};
use crate::scalar::{
    format_rational, parse_rational, Complex64, GaussianRational, Rational, RealScalar, Scalar,
    ScalarMode, Tolerance,
};
use crate::stokes::{MonodromyReport, StokesData, StokesType};

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{field}: {message}")]
pub struct InputError {
    /// JSON path such as `sigma[2][0]`, or the failed clause.
    pub field: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl InputError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        InputError {
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }

    /// Attributes a library error to the instance field it most likely comes from.
    pub fn from_stokes(err: &StokesError) -> Self {
        let field = match err {
            StokesError::NotGeneric(..) | StokesError::OnStokesDirection(..) => {
                "theta0".to_string()
            }
            StokesError::EqualFactors(_) => "factors".to_string(),
            StokesError::InvalidData(report) => report
                .violations
                .first()
                .map(|v| v.clause.clone())
                .unwrap_or_else(|| "sigma".into()),
            StokesError::BadPairing(_) | StokesError::IncompatiblePairing { .. } => "gram12".into(),
            StokesError::NotAdmissible(..) => "c".into(),
            _ => "instance".into(),
        };
        InputError::new(field, err.to_string())
    }
}

type Res<T> = std::result::Result<T, InputError>;

pub fn parse_json(text: &str) -> Res<Value> {
    serde_json::from_str(text).map_err(|e| InputError {
        field: "json".into(),
        message: e.to_string(),
        line: Some(e.line()),
        column: Some(e.column()),
    })
}

fn get<'a>(obj: &'a Value, key: &str) -> Res<&'a Value> {
    obj.get(key)
        .ok_or_else(|| InputError::new(key, "missing field"))
}

pub fn real_from_json<R: RealScalar>(v: &Value, path: &str) -> Res<R> {
    let exact: Option<BigRational> = match v {
        Value::String(s) => Some(
            parse_rational(s)
                .ok_or_else(|| InputError::new(path, format!("not a rational: {s:?}")))?,
        ),
        Value::Number(n) if R::EXACT => Some(
            parse_rational(&n.to_string())
                .ok_or_else(|| InputError::new(path, format!("cannot read {n} exactly")))?,
        ),
        Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| InputError::new(path, "number out of range"))?;
            return R::from_f64(x).ok_or_else(|| InputError::new(path, "number is not finite"));
        }
        _ => None,
    };
    exact
        .map(|q| R::from_rational(&q))
        .ok_or_else(|| InputError::new(path, "expected a number or a \"p/q\" string"))
}

pub fn scalar_from_json<S: Scalar>(v: &Value, path: &str) -> Res<S> {
    let (re, im) = match v {
        Value::Array(pair) if pair.len() == 2 => (
            real_from_json::<S::Real>(&pair[0], &format!("{path}[0]"))?,
            real_from_json::<S::Real>(&pair[1], &format!("{path}[1]"))?,
        ),
        Value::Array(_) => return Err(InputError::new(path, "complex entry must be [re, im]")),
        other => (
            real_from_json::<S::Real>(other, path)?,
            <S::Real as num_traits::Zero>::zero(),
        ),
    };
    S::from_parts(re, im).ok_or_else(|| {
        InputError::new(
            path,
            format!("nonzero imaginary part in {} mode", S::MODE.name()),
        )
    })
}

pub fn matrix_from_json<S: Scalar>(
    v: &Value,
    path: &str,
    rows: usize,
    cols: usize,
) -> Res<Matrix<S>> {
    let outer = v
        .as_array()
        .ok_or_else(|| InputError::new(path, "expected an array of rows"))?;
    if outer.len() != rows {
        return Err(InputError::new(
            path,
            format!("expected {rows} rows, found {}", outer.len()),
        ));
    }
    let mut m = Matrix::zeros(rows, cols);
    for (r, row) in outer.iter().enumerate() {
        let rp = format!("{path}[{r}]");
        let row = row
            .as_array()
            .ok_or_else(|| InputError::new(&rp, "expected a row array"))?;
        if row.len() != cols {
            return Err(InputError::new(
                &rp,
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
        for (c, x) in row.iter().enumerate() {
            m[(r, c)] = scalar_from_json(x, &format!("{rp}[{c}]"))?;
        }
    }
    Ok(m)
}

fn direction_from_json<R: RealScalar>(v: &Value) -> Res<Direction<R>> {
    match v {
        Value::Number(n) => {
            let theta = n
                .as_f64()
                .filter(|t| t.is_finite())
                .ok_or_else(|| InputError::new("theta0", "angle is not finite"))?;
            Ok(Direction::from_angle(theta))
        }
        Value::Object(_) => {
            let u = real_from_json::<R>(
                get(v, "u").map_err(|_| InputError::new("theta0.u", "missing field"))?,
                "theta0.u",
            )?;
            let w = real_from_json::<R>(
                get(v, "v").map_err(|_| InputError::new("theta0.v", "missing field"))?,
                "theta0.v",
            )?;
            Direction::new(u, w)
                .ok_or_else(|| InputError::new("theta0", "direction vector is zero"))
        }
        _ => Err(InputError::new(
            "theta0",
            "expected an angle or {\"u\", \"v\"}",
        )),
    }
}

pub fn factor_from_json<R: RealScalar>(v: &Value, path: &str) -> Res<Factor<R>> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Factor::new(
            real_from_json(&pair[0], &format!("{path}[0]"))?,
            real_from_json(&pair[1], &format!("{path}[1]"))?,
        )),
        Value::Array(_) => Err(InputError::new(path, "factor must be [re, im]")),
        other => Ok(Factor::real(real_from_json(other, path)?)),
    }
}

/// Instance data in whichever scalar domain the file requests.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyStokesData {
    Float(StokesData<Complex64>),
    Gaussian(StokesData<GaussianRational>),
    Rational(StokesData<Rational>),
}

impl AnyStokesData {
    pub fn mode(&self) -> ScalarMode {
        match self {
            AnyStokesData::Float(_) => ScalarMode::Float,
            AnyStokesData::Gaussian(_) => ScalarMode::GaussianRational,
            AnyStokesData::Rational(_) => ScalarMode::Rational,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyStokesData::Float(d) => instance_to_json(d),
            AnyStokesData::Gaussian(d) => instance_to_json(d),
            AnyStokesData::Rational(d) => instance_to_json(d),
        }
    }
}

pub fn load_instance(text: &str, mode: Option<ScalarMode>, tol: &Tolerance) -> Res<AnyStokesData> {
    let v = parse_json(text)?;
    instance_from_value(&v, mode, tol)
}

pub fn instance_from_value(
    v: &Value,
    mode: Option<ScalarMode>,
    tol: &Tolerance,
) -> Res<AnyStokesData> {
    if !v.is_object() {
        return Err(InputError::new("instance", "expected a JSON object"));
    }
    let mode = match mode {
        Some(m) => m,
        None => match v.get("scalar_mode") {
            None => ScalarMode::Float,
            Some(Value::String(s)) => ScalarMode::parse(s)
                .ok_or_else(|| InputError::new("scalar_mode", format!("unknown mode {s:?}")))?,
            Some(_) => return Err(InputError::new("scalar_mode", "expected a string")),
        },
    };
    Ok(match mode {
        ScalarMode::Float => AnyStokesData::Float(data_from_value(v, tol)?),
        ScalarMode::GaussianRational => AnyStokesData::Gaussian(data_from_value(v, tol)?),
        ScalarMode::Rational => AnyStokesData::Rational(data_from_value(v, tol)?),
    })
}

/// Reads one instance in the domain `S`. Factors may come in any order; the
/// matrices are given in file order and permuted to the sorted order. The data
/// is not validated unless a pairing has to be normalized.
pub fn data_from_value<S: Scalar>(v: &Value, tol: &Tolerance) -> Res<StokesData<S>> {
    let theta0 = direction_from_json::<S::Real>(get(v, "theta0")?)?;
    let factors: Vec<Factor<S::Real>> = get(v, "factors")?
        .as_array()
        .ok_or_else(|| InputError::new("factors", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, f)| factor_from_json(f, &format!("factors[{i}]")))
        .collect::<Res<_>>()?;
    let dims: Vec<usize> = get(v, "dims")?
        .as_array()
        .ok_or_else(|| InputError::new("dims", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.as_u64().map(|x| x as usize).ok_or_else(|| {
                InputError::new(format!("dims[{i}]"), "expected a nonnegative integer")
            })
        })
        .collect::<Res<_>>()?;
    if factors.len() != dims.len() {
        return Err(InputError::new(
            "dims",
            format!("{} factors but {} dims", factors.len(), dims.len()),
        ));
    }
    let n: usize = dims.iter().sum();
    let sigma_in = matrix_from_json::<S>(get(v, "sigma")?, "sigma", n, n)?;
    let sigma_prime_in = match v.get("sigma_prime") {
        Some(Value::Null) | None => None,
        Some(m) => Some(matrix_from_json::<S>(m, "sigma_prime", n, n)?),
    };
    let gram_in = match v.get("gram12") {
        Some(Value::Null) | None => None,
        Some(m) => Some(matrix_from_json::<S>(m, "gram12", n, n)?),
    };

    let (ty, kept) = StokesType::new(factors, dims.clone(), theta0, tol)
        .map_err(|e| InputError::from_stokes(&e))?;
    let mut starts = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for d in &dims {
        starts.push(acc);
        acc += d;
    }
    let coords: Vec<usize> = kept
        .iter()
        .flat_map(|&i| starts[i]..starts[i] + dims[i])
        .collect();
    let permute = |m: &Matrix<S>| {
        Matrix::from_fn(coords.len(), coords.len(), |a, b| {
            m[(coords[a], coords[b])].clone()
        })
    };
    let sigma = permute(&sigma_in);
    let sigma_prime = match &sigma_prime_in {
        Some(m) => permute(m),
        None => -&sigma.adjoint(),
    };
    let data = StokesData::new(ty, sigma, sigma_prime);
    match gram_in {
        None => Ok(data),
        Some(g) => pairing::normalize_pairing(&data, &permute(&g), tol)
            .map_err(|e| InputError::from_stokes(&e)),
    }
}

pub fn real_to_json<R: RealScalar>(x: &R) -> Value {
    if R::EXACT {
        Value::String(x.to_text())
    } else {
        json!(x.to_f64())
    }
}

pub fn rational_to_json(x: &BigRational) -> Value {
    Value::String(format_rational(x))
}

pub fn scalar_to_json<S: Scalar>(x: &S) -> Value {
    if S::MODE == ScalarMode::Rational {
        real_to_json(&x.re())
    } else {
        json!([real_to_json(&x.re()), real_to_json(&x.im())])
    }
}

pub fn matrix_to_json<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array((0..m.cols()).map(|c| scalar_to_json(&m[(r, c)])).collect()))
            .collect(),
    )
}

pub fn vectors_to_json<S: Scalar>(vs: &[Vec<S>]) -> Value {
    Value::Array(
        vs.iter()
            .map(|v| Value::Array(v.iter().map(scalar_to_json).collect()))
            .collect(),
    )
}

pub fn factor_to_json<R: RealScalar>(f: &Factor<R>) -> Value {
    json!([real_to_json(&f.re), real_to_json(&f.im)])
}

pub fn direction_to_json<R: RealScalar>(d: &Direction<R>) -> Value {
    json!({"u": real_to_json(&d.u), "v": real_to_json(&d.v)})
}

/// Instance file for `d`, with factors listed in sorted order.
pub fn instance_to_json<S: Scalar>(d: &StokesData<S>) -> Value {
    json!({
        "scalar_mode": S::MODE.name(),
        "theta0": direction_to_json(&d.ty.theta0),
        "factors": d.ty.factors.iter().map(factor_to_json).collect::<Vec<_>>(),
        "dims": d.ty.dims,
        "sigma": matrix_to_json(&d.sigma),
        "sigma_prime": matrix_to_json(&d.sigma_prime),
    })
}

/// JSON rendering of library results.
pub trait ToJson {
    fn to_json(&self) -> Value;
}

impl<S: Scalar> ToJson for Matrix<S> {
    fn to_json(&self) -> Value {
        matrix_to_json(self)
    }
}

impl<S: Scalar> ToJson for StokesData<S> {
    fn to_json(&self) -> Value {
        instance_to_json(self)
    }
}

impl<S: Scalar> ToJson for MonodromyReport<S> {
    fn to_json(&self) -> Value {
        json!({
            "t1": matrix_to_json(&self.t1),
            "graded": self.graded.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "eigenvalue_one_dim": self.eigenvalue_one_dim,
        })
    }
}

impl<S: Scalar> ToJson for HermitianReport<S> {
    fn to_json(&self) -> Value {
        json!({
            "class": self.class,
            "rank": self.rank,
            "kernel": vectors_to_json(&self.kernel),
            "positive": self.positive,
            "negative": self.negative,
            "min_eigenvalue": self.min_eigenvalue,
            "max_abs_eigenvalue": self.max_abs_eigenvalue,
        })
    }
}

impl<S: Scalar> ToJson for InducedForm<S> {
    fn to_json(&self) -> Value {
        json!({
            "can1": matrix_to_json(&self.can1),
            "dim_f": self.pivots.len(),
            "pivots": self.pivots,
            "f_basis": vectors_to_json(&self.f_basis),
            "gram": matrix_to_json(&self.gram),
        })
    }
}

impl<S: Scalar> ToJson for KSpace<S> {
    fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "factor": factor_to_json(&self.factor),
            "dim": self.dim(),
            "basis": vectors_to_json(&self.basis),
            "h_k": matrix_to_json(&self.h_k),
        })
    }
}

impl<S: Scalar> ToJson for SplitResult<S> {
    fn to_json(&self) -> Value {
        json!({
            "trivial": self.trivial.iter().map(|t| json!({
                "index": t.index,
                "factor": factor_to_json(&t.factor),
                "rank": t.rank,
                "sigma": matrix_to_json(&t.sigma_block),
                "sigma_prime": matrix_to_json(&t.sigma_prime_block),
            })).collect::<Vec<_>>(),
            "minimal": instance_to_json(&self.minimal),
            "change_of_basis": matrix_to_json(&self.change_of_basis),
        })
    }
}

impl<S: Scalar> ToJson for KReport<S> {
    fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "factor": factor_to_json(&self.factor),
            "dim": self.dim,
            "h_k": matrix_to_json(&self.h_k),
            "i_h_k_class": self.i_h_k_class,
            "ok": self.ok,
        })
    }
}

impl<S: Scalar> ToJson for Certificate<S> {
    fn to_json(&self) -> Value {
        let mut out = Map::new();
        if let Value::Object(v) = serde_json::to_value(&self.verdict).expect("verdict serializes") {
            out.extend(v);
        }
        out.insert(
            "skew".into(),
            serde_json::to_value(&self.skew).expect("serializes"),
        );
        out.insert("h".into(), matrix_to_json(&self.h));
        out.insert("h_report".into(), self.h_report.to_json());
        out.insert(
            "k_reports".into(),
            Value::Array(self.k_reports.iter().map(ToJson::to_json).collect()),
        );
        out.insert(
            "split".into(),
            serde_json::to_value(&self.split).expect("serializes"),
        );
        out.insert(
            "induced_gram".into(),
            self.induced_gram
                .as_ref()
                .map(matrix_to_json)
                .unwrap_or(Value::Null),
        );
        Value::Object(out)
    }
}

impl<S: Scalar> ToJson for CohomologyReport<S> {
    fn to_json(&self) -> Value {
        json!({
            "c": factor_to_json(&self.c),
            "sections": self.sections,
            "sub": self.sub,
            "quotient": self.quotient,
            "total": self.total,
            "can": matrix_to_json(&self.can),
            "dim_f": self.dim_f,
            "restriction_rank": self.restriction_rank,
            "h1_f_le_c": self.h1_f_le_c,
            "h2_f_le_c": self.h2_f_le_c,
        })
    }
}

impl<S: Scalar> ToJson for CechPairing<S> {
    fn to_json(&self) -> Value {
        json!({
            "first_sheet": matrix_to_json(&self.first_sheet),
            "second_sheet": matrix_to_json(&self.second_sheet),
            "averaged": matrix_to_json(&self.averaged),
        })
    }
}

impl ToJson for IndexResult {
    fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializes")
    }
}

pub fn load_loop(text: &str) -> Res<MatrixLoop> {
    loop_from_value(&parse_json(text)?, "")
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// `{"dim", "fourier": {"k": matrix}}`, `{"dim", "samples": [matrix]}` or a
/// constructor `{"kind": "constant" | "monomial" | "upper_example" | "product" | "block_diagonal", …}`.
pub fn loop_from_value(v: &Value, path: &str) -> Res<MatrixLoop> {
    let field = |key: &str| {
        v.get(key)
            .ok_or_else(|| InputError::new(join(path, key), "missing field"))
    };
    let bad = |key: &str, e: StokesError| InputError::new(join(path, key), e.to_string());
    if let Some(kind) = v.get("kind") {
        let kind = kind
            .as_str()
            .ok_or_else(|| InputError::new(join(path, "kind"), "expected a string"))?;
        let sub_loops = |key: &str| -> Res<Vec<MatrixLoop>> {
            field(key)?
                .as_array()
                .ok_or_else(|| InputError::new(join(path, key), "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, l)| loop_from_value(l, &format!("{}[{i}]", join(path, key))))
                .collect()
        };
        let lk = match kind {
            "constant" => {
                let m = field("matrix")?;
                let d = m.as_array().map(Vec::len).unwrap_or(0);
                LoopKind::Constant(matrix_from_json::<Complex64>(
                    m,
                    &join(path, "matrix"),
                    d,
                    d,
                )?)
            }
            "monomial" => LoopKind::Monomial(
                field("exponents")?
                    .as_array()
                    .ok_or_else(|| InputError::new(join(path, "exponents"), "expected an array"))?
                    .iter()
                    .enumerate()
                    .map(|(i, k)| {
                        k.as_i64().ok_or_else(|| {
                            InputError::new(
                                format!("{}[{i}]", join(path, "exponents")),
                                "expected an integer",
                            )
                        })
                    })
                    .collect::<Res<_>>()?,
            ),
            "upper_example" => LoopKind::UpperExample,
            "product" => LoopKind::Product(sub_loops("factors")?),
            "block_diagonal" => LoopKind::BlockDiagonal(sub_loops("blocks")?),
            other => {
                return Err(InputError::new(
                    join(path, "kind"),
                    format!("unknown loop kind {other:?}"),
                ))
            }
        };
        return make_loop(lk).map_err(|e| bad("kind", e));
    }
    let dim = field("dim")?
        .as_u64()
        .filter(|&d| d > 0)
        .ok_or_else(|| InputError::new(join(path, "dim"), "expected a positive integer"))?
        as usize;
    if let Some(f) = v.get("fourier") {
        let obj = f.as_object().ok_or_else(|| {
            InputError::new(join(path, "fourier"), "expected an object keyed by k")
        })?;
        let mut coeffs = BTreeMap::new();
        for (k, m) in obj {
            let p = format!("{}.{k}", join(path, "fourier"));
            let key: i64 = k
                .trim()
                .parse()
                .map_err(|_| InputError::new(&p, "key is not an integer"))?;
            coeffs.insert(key, matrix_from_json::<Complex64>(m, &p, dim, dim)?);
        }
        return MatrixLoop::from_fourier(dim, coeffs).map_err(|e| bad("fourier", e));
    }
    if let Some(s) = v.get("samples") {
        let arr = s
            .as_array()
            .ok_or_else(|| InputError::new(join(path, "samples"), "expected an array"))?;
        let samples = arr
            .iter()
            .enumerate()
            .map(|(j, m)| {
                matrix_from_json::<Complex64>(
                    m,
                    &format!("{}[{j}]", join(path, "samples")),
                    dim,
                    dim,
                )
            })
            .collect::<Res<Vec<_>>>()?;
        return MatrixLoop::from_samples(dim, samples).map_err(|e| bad("samples", e));
    }
    Err(InputError::new(
        if path.is_empty() {
            "loop".to_string()
        } else {
            path.to_string()
        },
        "expected \"fourier\", \"samples\" or \"kind\"",
    ))
}

pub fn loop_to_json(g: &MatrixLoop) -> Value {
    match &g.repr {
        crate::birkhoff::LoopRepr::Fourier(m) => json!({
            "dim": g.dim,
            "fourier": m.iter().map(|(k, c)| (k.to_string(), matrix_to_json(c))).collect::<Map<_, _>>(),
        }),
        crate::birkhoff::LoopRepr::Samples(s) => json!({
            "dim": g.dim,
            "samples": s.iter().map(matrix_to_json).collect::<Vec<_>>(),
        }),
    }
}
