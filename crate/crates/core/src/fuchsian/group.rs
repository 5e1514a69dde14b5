//! Balls in the surface group, deduplicated with a faithful reference representation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Matrix2, Vector3};

use super::{build_genus2, inverse_sl2, linear_part, vec_of_sym, FuchsianRep, Word};

const RADIUS_CELL: f64 = 0.05;
const MATCH_TOL: f64 = 1e-4;

/// Reference rep used for element equality and hashing.
pub fn reference_rep() -> &'static FuchsianRep {
    static REP: OnceLock<FuchsianRep> = OnceLock::new();
    REP.get_or_init(|| build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).expect("reference rep"))
}

/// Generic base point of the hyperboloid used for hashing.
fn base_point() -> Vector3<f64> {
    let y1: f64 = 0.137;
    let y2: f64 = -0.291;
    Vector3::new(y1, y2, (1.0 + y1 * y1 + y2 * y2).sqrt())
}

/// Element equality in the surface group.
pub fn elem_eq(w1: &Word, w2: &Word) -> bool {
    let m = reference_rep().evaluate(&w1.inverse().mul(w2));
    let id = Matrix2::identity();
    (m - id).amax().min((m + id).amax()) < 1e-6
}

#[derive(Debug, Clone)]
pub struct GroupBall {
    pub max_len: usize,
    /// Canonical (shortlex-first) word of each element; index 0 is the identity.
    pub words: Vec<Word>,
    /// Element i = parent[i] · letter[i] (unused for i = 0).
    pub parent: Vec<usize>,
    pub letter: Vec<i8>,
    /// Displacement used by geometric balls (zero for word balls).
    pub reach: Vec<f64>,
    buckets: HashMap<i64, Vec<usize>>,
    points: Vec<(f64, f64)>,
}

fn polar(y: &Vector3<f64>) -> (f64, f64) {
    (y[2].max(1.0).acosh(), y[1].atan2(y[0]))
}

impl GroupBall {
    fn build(max_len: usize) -> GroupBall {
        let rep = reference_rep();
        let z0 = base_point();
        let mut ball = GroupBall {
            max_len,
            words: vec![Word::identity()],
            parent: vec![0],
            letter: vec![0],
            reach: vec![0.0],
            buckets: HashMap::new(),
            points: Vec::new(),
        };
        let mut mats: Vec<Matrix2<f64>> = vec![Matrix2::identity()];
        ball.insert_point(polar(&z0));
        let mut frontier = vec![0usize];
        let letters: [i8; 8] = [1, -1, 2, -2, 3, -3, 4, -4];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for &i in &frontier {
                for &l in &letters {
                    if ball.words[i].0.last() == Some(&-l) {
                        continue;
                    }
                    let m = mats[i] * rep.generator(l);
                    let y = linear_part(&m) * z0;
                    let pol = polar(&y);
                    if ball.find(pol).is_some() {
                        continue;
                    }
                    let mut w = ball.words[i].0.clone();
                    w.push(l);
                    ball.words.push(Word(w));
                    ball.parent.push(i);
                    ball.letter.push(l);
                    mats.push(m);
                    ball.insert_point(pol);
                    next.push(ball.words.len() - 1);
                }
            }
            frontier = next;
        }
        ball
    }

    /// Elements g such that, for one of the reps, ρ(g) moves some center within
    /// hyperbolic distance `radius` of some center. Built breadth-first through
    /// elements within `radius + slack`, which are kept as well; `reach` records
    /// the smallest such distance.
    pub fn geometric(
        reps: &[&FuchsianRep],
        centers: &[Vector3<f64>],
        radius: f64,
        slack: f64,
    ) -> GroupBall {
        let z0 = base_point();
        let mut ball = GroupBall {
            max_len: 0,
            words: vec![Word::identity()],
            parent: vec![0],
            letter: vec![0],
            reach: vec![0.0],
            buckets: HashMap::new(),
            points: Vec::new(),
        };
        ball.insert_point(polar(&z0));
        let reference = reference_rep();
        let mut ref_mats = vec![Matrix2::identity()];
        let mut mats: Vec<Vec<Matrix2<f64>>> = vec![vec![Matrix2::identity(); reps.len()]];
        let reach_of = |ms: &[Matrix2<f64>]| -> f64 {
            let mut best = f64::INFINITY;
            for m in ms {
                let a = linear_part(m);
                for c in centers {
                    let y = a * c;
                    for d in centers {
                        let ip = d[2] * y[2] - d[0] * y[0] - d[1] * y[1];
                        best = best.min(ip.max(1.0).acosh());
                    }
                }
            }
            best
        };
        let letters: [i8; 8] = [1, -1, 2, -2, 3, -3, 4, -4];
        // paths to nearby elements may leave the radius by up to one generator step
        let step = letters
            .iter()
            .flat_map(|&l| reps.iter().map(move |r| r.generator(l)))
            .map(|g| reach_of(&[g]))
            .fold(0.0, f64::max);
        let slack = slack.max(step);
        let mut head = 0;
        while head < ball.words.len() {
            let i = head;
            head += 1;
            if ball.words[i].len() >= 40 {
                continue;
            }
            for &l in &letters {
                if ball.words[i].0.last() == Some(&-l) {
                    continue;
                }
                let m: Vec<Matrix2<f64>> = reps
                    .iter()
                    .zip(&mats[i])
                    .map(|(r, g)| g * r.generator(l))
                    .collect();
                let r = reach_of(&m);
                if r > radius + slack {
                    continue;
                }
                let mref = ref_mats[i] * reference.generator(l);
                let pol = polar(&(linear_part(&mref) * z0));
                if ball.find(pol).is_some() {
                    continue;
                }
                let mut w = ball.words[i].0.clone();
                w.push(l);
                ball.max_len = ball.max_len.max(w.len());
                ball.words.push(Word(w));
                ball.parent.push(i);
                ball.letter.push(l);
                ball.reach.push(r);
                ref_mats.push(mref);
                mats.push(m);
                ball.insert_point(pol);
            }
        }
        ball
    }

    fn insert_point(&mut self, pol: (f64, f64)) {
        let key = (pol.0 / RADIUS_CELL).round() as i64;
        self.buckets.entry(key).or_default().push(self.points.len());
        self.points.push(pol);
    }

    fn find(&self, pol: (f64, f64)) -> Option<usize> {
        let key = (pol.0 / RADIUS_CELL).round() as i64;
        for k in key - 1..=key + 1 {
            let Some(b) = self.buckets.get(&k) else {
                continue;
            };
            for &i in b {
                let (r, t) = self.points[i];
                let mut dt = (t - pol.1).abs();
                if dt > std::f64::consts::PI {
                    dt = 2.0 * std::f64::consts::PI - dt;
                }
                if (r - pol.0).abs() < MATCH_TOL && dt * r.sinh().max(1.0) < MATCH_TOL {
                    return Some(i);
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of the element represented by `w`, if it lies in the ball.
    pub fn index_of(&self, w: &Word) -> Option<usize> {
        let m = reference_rep().evaluate(w);
        let y = linear_part(&m) * base_point();
        self.find(polar(&y))
    }

    /// Canonical word of an arbitrary element (the reduced word itself when outside the ball).
    pub fn canonical(&self, w: &Word) -> Word {
        match self.index_of(w) {
            Some(i) => self.words[i].clone(),
            None => w.reduced(),
        }
    }

    /// Matrices of all elements under `rep`.
    pub fn matrices(&self, rep: &FuchsianRep) -> Vec<Matrix2<f64>> {
        let mut out = Vec::with_capacity(self.len());
        out.push(Matrix2::identity());
        for i in 1..self.len() {
            let m = out[self.parent[i]] * rep.generator(self.letter[i]);
            out.push(m);
        }
        out
    }

    /// Elements whose canonical word has length ≤ L.
    pub fn up_to(&self, max_len: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.words[i].len() <= max_len)
    }
}

/// Cached ball of radius L (word length).
pub fn ball(max_len: usize) -> Arc<GroupBall> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GroupBall>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&max_len) {
        return b.clone();
    }
    let b = Arc::new(GroupBall::build(max_len));
    cache.lock().unwrap().insert(max_len, b.clone());
    b
}

/// Hyperboloid image g·z of a point under the matrix g.
pub fn act_hyperboloid(g: &Matrix2<f64>, z: &Vector3<f64>) -> Vector3<f64> {
    vec_of_sym(&(g * super::sym_of(z) * g.transpose()))
}

/// Inverse of an element's matrix.
pub fn inv(m: &Matrix2<f64>) -> Matrix2<f64> {
    inverse_sl2(m)
}
