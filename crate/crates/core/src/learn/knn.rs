use serde::{Deserialize, Serialize};

use super::data::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Manhattan,
    Euclidean,
}

impl Distance {
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }
}

/// Brute-force k-nearest-neighbour vote. Neighbour order is (distance, row
/// index); a tied vote goes to the nearest neighbour's label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub x: Matrix,
    pub y: Vec<bool>,
    pub k: usize,
    pub distance: Distance,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[bool], k: usize, distance: Distance) -> Knn {
        Knn {
            x: x.clone(),
            y: y.to_vec(),
            k: k.max(1),
            distance,
        }
    }

    pub fn neighbours(&self, row: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = (0..self.x.rows())
            .map(|i| (self.distance.eval(self.x.row(i), row), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        let nn = self.neighbours(row);
        let pos = nn.iter().filter(|(_, i)| self.y[*i]).count();
        let neg = nn.len() - pos;
        match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => self.y[nn[0].1],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(Distance::Manhattan.eval(&[0.0, 0.0], &[3.0, -4.0]), 7.0);
        assert_eq!(Distance::Euclidean.eval(&[0.0, 0.0], &[3.0, -4.0]), 5.0);
    }

    #[test]
    fn majority_and_tie_break() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0]]).unwrap();
        let y = [true, true, true, false, false];
        let knn = Knn::fit(&x, &y, 3, Distance::Euclidean);
        assert!(knn.predict(&[1.2]));
        assert!(!Knn::fit(&x, &y, 1, Distance::Euclidean).predict(&[9.0]));
        // k = 2 at 6.2: neighbours 10 (external) and 2 (internal), nearest wins
        let k2 = Knn::fit(&x, &y, 2, Distance::Manhattan);
        assert!(!k2.predict(&[6.2]));
        assert!(k2.predict(&[5.8]));
    }
}
