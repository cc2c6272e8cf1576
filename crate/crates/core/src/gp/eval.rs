use crate::error::{Error, Result};
use crate::gp::program::{Node, Program};
use crate::matrix::Matrix;
use crate::primitives::{if3, if4, Primitive};

/// Column-major copy of a feature matrix, built once per dataset so that
/// repeated program evaluation reads features contiguously.
#[derive(Clone, Debug)]
pub struct Columns {
    rows: usize,
    cols: Vec<Vec<f64>>,
}

impl Columns {
    pub fn new(x: &Matrix) -> Self {
        Self {
            rows: x.rows(),
            cols: (0..x.cols()).map(|j| x.column(j).collect()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

/// Reusable buffer pool for evaluating many programs over the same rows.
#[derive(Default)]
pub struct Evaluator {
    pool: Vec<Vec<f64>>,
    stack: Vec<Vec<f64>>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    fn take(&mut self, rows: usize) -> Vec<f64> {
        let mut buf = self.pool.pop().unwrap_or_default();
        buf.clear();
        buf.reserve(rows);
        buf
    }

    /// Evaluates `program` on every row. Feature indices are assumed to be in
    /// range; use [`evaluate`] for a checked entry point.
    ///
    /// Nodes are processed right to left so each operator finds its arguments
    /// on the stack leftmost-first; every row sees the same per-element
    /// operation sequence as a recursive interpreter would perform.
    pub fn run(&mut self, program: &Program, data: &Columns) -> Vec<f64> {
        let rows = data.rows;
        for node in program.nodes().iter().rev() {
            match *node {
                Node::Const(v) => {
                    let mut buf = self.take(rows);
                    buf.resize(rows, v);
                    self.stack.push(buf);
                }
                Node::Feature(j) => {
                    let mut buf = self.take(rows);
                    buf.extend_from_slice(&data.cols[j]);
                    self.stack.push(buf);
                }
                Node::Op(p) => self.apply(p),
            }
        }
        let out = self.stack.pop().expect("program produced no value");
        debug_assert!(self.stack.is_empty());
        out
    }

    /// Like [`run`](Self::run), then hands the result buffer back to the pool
    /// after `f` has consumed it.
    pub fn run_with<T>(&mut self, program: &Program, data: &Columns, f: impl FnOnce(&[f64]) -> T) -> T {
        let out = self.run(program, data);
        let r = f(&out);
        self.pool.push(out);
        r
    }

    fn apply(&mut self, p: Primitive) {
        let mut a = self.stack.pop().expect("stack underflow");
        match p.arity() {
            1 => {
                for v in a.iter_mut() {
                    *v = p.apply1(*v);
                }
            }
            2 => {
                let b = self.stack.pop().expect("stack underflow");
                for (x, &y) in a.iter_mut().zip(&b) {
                    *x = p.apply2(*x, y);
                }
                self.pool.push(b);
            }
            3 => {
                let b = self.stack.pop().expect("stack underflow");
                let c = self.stack.pop().expect("stack underflow");
                for ((x, &t), &o) in a.iter_mut().zip(&b).zip(&c) {
                    *x = if3(*x, t, o);
                }
                self.pool.push(b);
                self.pool.push(c);
            }
            _ => {
                let b = self.stack.pop().expect("stack underflow");
                let c = self.stack.pop().expect("stack underflow");
                let d = self.stack.pop().expect("stack underflow");
                for (((x, &r), &t), &o) in a.iter_mut().zip(&b).zip(&c).zip(&d) {
                    *x = if4(*x, r, t, o);
                }
                self.pool.push(b);
                self.pool.push(c);
                self.pool.push(d);
            }
        }
        self.stack.push(a);
    }
}

pub(crate) fn check_features(program: &Program, n_features: usize) -> Result<()> {
    match program.max_feature() {
        Some(j) if j >= n_features => Err(Error::FeatureMismatch {
            expected: j + 1,
            found: n_features,
        }),
        _ => Ok(()),
    }
}

/// Evaluates `program` on every row of `x`.
pub fn evaluate(program: &Program, x: &Matrix) -> Result<Vec<f64>> {
    check_features(program, x.cols())?;
    Ok(Evaluator::new().run(program, &Columns::new(x)))
}

/// Mean absolute error, summed in row order.
pub(crate) fn mean_abs_error(pred: &[f64], truth: &[f64]) -> f64 {
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    sum / truth.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fitness {
    /// Training MAE.
    pub raw: f64,
    /// MAE plus the parsimony penalty; what selection minimizes.
    pub penalized: f64,
}

impl Fitness {
    pub const WORST: Fitness = Fitness {
        raw: f64::INFINITY,
        penalized: f64::INFINITY,
    };

    pub(crate) fn from_predictions(pred: &[f64], y: &[f64], nodes: usize, parsimony: f64) -> Self {
        if pred.iter().any(|v| !v.is_finite()) {
            return Self::WORST;
        }
        let raw = mean_abs_error(pred, y);
        if !raw.is_finite() {
            return Self::WORST;
        }
        Fitness {
            raw,
            penalized: raw + parsimony * nodes as f64,
        }
    }
}

/// MAE of `program` on `(x, y)` and its parsimony-penalized counterpart.
/// Any non-finite prediction yields [`Fitness::WORST`].
pub fn fitness(program: &Program, x: &Matrix, y: &[f64], parsimony_coefficient: f64) -> Result<Fitness> {
    if y.is_empty() || x.rows() == 0 {
        return Err(Error::EmptyInput("fitness needs at least one row"));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            what: "rows of X vs length of y",
            left: x.rows(),
            right: y.len(),
        });
    }
    let pred = evaluate(program, x)?;
    Ok(Fitness::from_predictions(&pred, y, program.len(), parsimony_coefficient))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn constant_and_projection() {
        let x = Matrix::zeros(4, 2);
        assert_eq!(evaluate(&Program::constant(3.5), &x).unwrap(), vec![3.5; 4]);
        let x = m(&[&[7.0, 2.0]]);
        assert_eq!(evaluate(&Program::feature(1), &x).unwrap(), vec![2.0]);
    }

    #[test]
    fn square() {
        let p: Program = "(mul x0 x0)".parse().unwrap();
        let x = m(&[&[2.0], &[-3.0]]);
        assert_eq!(evaluate(&p, &x).unwrap(), vec![4.0, 9.0]);
    }

    #[test]
    fn argument_order() {
        let p: Program = "(sub (div x0 x1) (if4 x0 x1 1.0 -1.0))".parse().unwrap();
        let x = m(&[&[6.0, 3.0], &[1.0, 4.0]]);
        assert_eq!(evaluate(&p, &x).unwrap(), vec![2.0 - 1.0, 0.25 + 1.0]);
    }

    #[test]
    fn out_of_range_feature_rejected() {
        let x = Matrix::zeros(3, 2);
        assert!(matches!(
            evaluate(&Program::feature(2), &x),
            Err(Error::FeatureMismatch { .. })
        ));
    }

    #[test]
    fn fitness_values() {
        let x = m(&[&[1.0], &[-1.0]]);
        let y = [1.0, -1.0];
        let f = fitness(&Program::feature(0), &x, &y, 0.001).unwrap();
        assert_eq!(f.raw, 0.0);
        let f = fitness(&Program::constant(0.0), &x, &y, 0.0).unwrap();
        assert_eq!(f.raw, 1.0);
        // 5 nodes at 0.001 each on top of raw 1.0
        let p: Program = "(add (sub 0.0 0.0) 0.0)".parse().unwrap();
        let f = fitness(&p, &x, &y, 0.001).unwrap();
        assert_eq!(f.raw, 1.0);
        assert!((f.penalized - 1.005).abs() < 1e-15);
    }

    #[test]
    fn non_finite_predictions_are_worst() {
        let x = m(&[&[1e200], &[1.0]]);
        let p: Program = "(mul x0 x0)".parse().unwrap();
        assert_eq!(fitness(&p, &x, &[0.0, 0.0], 0.001).unwrap(), Fitness::WORST);
    }

    #[test]
    fn fitness_input_errors() {
        let x = Matrix::zeros(0, 1);
        assert!(matches!(
            fitness(&Program::constant(0.0), &x, &[], 0.0),
            Err(Error::EmptyInput(_))
        ));
        let x = Matrix::zeros(2, 1);
        assert!(fitness(&Program::constant(0.0), &x, &[1.0], 0.0).is_err());
    }

    #[test]
    fn zero_rows_give_empty_predictions() {
        let x = Matrix::zeros(0, 3);
        let p: Program = "(add x0 x2)".parse().unwrap();
        assert!(evaluate(&p, &x).unwrap().is_empty());
    }
}
