use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::corpus::Vocabulary;
use crate::drift::nearest_neighbors;
use crate::error::{Error, Result};
use crate::model::EmbeddingState;

/// Points on the first two principal axes of the selected vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub labels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// Variance captured by each of the two axes.
    pub variance: [f64; 2],
    /// Squared reconstruction error from the discarded axes.
    pub residual: f64,
}

/// Principal-component projection of labelled vectors onto two axes. Each
/// axis is oriented so that its largest-magnitude loading is positive.
pub fn project_2d(points: &[(String, Vec<f64>)]) -> Result<Projection> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 vectors to project, got {n}")));
    }
    let dim = points[0].1.len();
    if points.iter().any(|p| p.1.len() != dim) || dim == 0 {
        return Err(Error::Shape("vectors differ in dimension".into()));
    }
    let mut x = DMatrix::from_fn(n, dim, |i, j| points[i].1[j]);
    let mean = x.row_mean();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }
    let cov = x.transpose() * &x / n as f64;
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut axes = Vec::with_capacity(2);
    let mut variance = [0.0; 2];
    for k in 0..2 {
        match order.get(k) {
            Some(&i) => {
                let mut axis = eig.eigenvectors.column(i).into_owned();
                let lead = axis.iter().copied().fold(0.0, |m: f64, a| if a.abs() > m.abs() { a } else { m });
                if lead < 0.0 {
                    axis.neg_mut();
                }
                variance[k] = eig.eigenvalues[i].max(0.0);
                axes.push(Some(axis));
            }
            None => axes.push(None),
        }
    }
    let residual = order.iter().skip(2).map(|&i| eig.eigenvalues[i].max(0.0)).sum::<f64>() * n as f64;
    let coords = x
        .row_iter()
        .map(|row| {
            let c = |a: &Option<nalgebra::DVector<f64>>| a.as_ref().map_or(0.0, |a| row.dot(&a.transpose()));
            [c(&axes[0]), c(&axes[1])]
        })
        .collect();
    Ok(Projection {
        labels: points.iter().map(|p| p.0.clone()).collect(),
        coords,
        variance,
        residual,
    })
}

/// One aligned model to draw vectors from.
pub struct ProjectionSource<'a> {
    pub name: &'a str,
    pub state: &'a EmbeddingState,
    pub vocab: &'a Vocabulary,
}

/// Trajectories of the focus words in every model and slice, plus their `m`
/// nearest neighbors at each slice. Labels read `model:word:t`; a vector is
/// included once even if it is selected several times.
pub fn projection_points(
    sources: &[ProjectionSource],
    focus: &[&str],
    m: usize,
) -> Result<Vec<(String, Vec<f64>)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for src in sources {
        for word in focus {
            let Some(id) = src.vocab.id(word) else {
                continue;
            };
            let id = id as usize;
            for t in 0..src.state.num_slices() {
                let nn = nearest_neighbors(src.state, id, t, m)?;
                for v in std::iter::once(id).chain(nn.into_iter().map(|p| p.0)) {
                    if seen.insert((src.name, v, t)) {
                        out.push((format!("{}:{}:{t}", src.name, src.vocab.word(v)), src.state.rho(t, v).to_vec()));
                    }
                }
            }
        }
    }
    let found = focus.iter().any(|w| sources.iter().any(|s| s.vocab.id(w).is_some()));
    if !found {
        return Err(Error::UnknownWord(focus.join(",")));
    }
    Ok(out)
}

impl Projection {
    /// `label<TAB>x<TAB>y` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\tx\ty\n");
        for (l, [x, y]) in self.labels.iter().zip(&self.coords) {
            writeln!(out, "{l}\t{x}\t{y}").unwrap();
        }
        out
    }
}
