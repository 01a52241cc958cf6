use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LogNum, Mass, MeasurableSet, MeasureError, Point, TestFunction};

/// Probability measures must have total mass within this of 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub mass: Mass,
}

/// A finitely supported nonnegative measure on `[0,1]`.
///
/// Atoms are sorted by point, carry strictly positive mass, and are pairwise
/// distinct in the sense of [`Point::same_atom`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Canonicalizes arbitrary `(point, mass)` pairs: sorts, merges
    /// coincident atoms, drops zero masses.
    pub fn new<I: IntoIterator<Item = (Point, Mass)>>(atoms: I) -> AtomicMeasure {
        let mut raw: Vec<Atom> = atoms
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(point, mass)| Atom { point, mass })
            .collect();
        raw.sort_by_key(|a| a.point);
        let mut out: Vec<Atom> = Vec::with_capacity(raw.len());
        for atom in raw {
            match out.last_mut() {
                Some(last) if last.point.same_atom(atom.point) => {
                    last.mass = last.mass + atom.mass;
                }
                _ => out.push(atom),
            }
        }
        AtomicMeasure { atoms: out }
    }

    /// From linear `(x, mass)` pairs.
    pub fn from_linear(pairs: &[(f64, f64)]) -> Result<AtomicMeasure, MeasureError> {
        let mut atoms = Vec::with_capacity(pairs.len());
        for &(x, m) in pairs {
            let mass = Mass::new(m).ok_or(MeasureError::InvalidMass(m))?;
            atoms.push((Point::new(x)?, mass));
        }
        Ok(AtomicMeasure::new(atoms))
    }

    pub fn dirac(x: Point) -> AtomicMeasure {
        AtomicMeasure {
            atoms: vec![Atom {
                point: x,
                mass: Mass::ONE,
            }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> Mass {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn is_probability(&self) -> bool {
        self.total().ln().abs() <= PROBABILITY_TOLERANCE
    }

    pub fn require_probability(&self) -> Result<(), MeasureError> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(MeasureError::NotProbability {
                total: self.total().value(),
            })
        }
    }

    /// `μ(E)` in the linear domain.
    pub fn mass(&self, set: &MeasurableSet) -> f64 {
        self.atoms
            .iter()
            .filter(|a| set.contains(a.point))
            .map(|a| a.mass.value())
            .sum()
    }

    /// `μ(E)` in the log domain; survives underflow.
    pub fn log_mass(&self, set: &MeasurableSet) -> Mass {
        self.atoms
            .iter()
            .filter(|a| set.contains(a.point))
            .map(|a| a.mass)
            .sum()
    }

    /// Mass of the atom at `x`, or zero.
    pub fn mass_at(&self, x: Point) -> Mass {
        self.atoms
            .iter()
            .find(|a| a.point.same_atom(x))
            .map_or(Mass::ZERO, |a| a.mass)
    }

    pub fn support(&self) -> MeasurableSet {
        MeasurableSet::from_points(self.atoms.iter().map(|a| a.point))
    }

    pub fn scale(&self, factor: Mass) -> AtomicMeasure {
        AtomicMeasure::new(self.atoms.iter().map(|a| (a.point, a.mass * factor)))
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson::from(self)
    }
}

impl fmt::Display for AtomicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {})", a.point, a.mass)?;
        }
        write!(f, "}}")
    }
}

pub fn dirac(x: Point) -> AtomicMeasure {
    AtomicMeasure::dirac(x)
}

pub fn mass(mu: &AtomicMeasure, set: &MeasurableSet) -> f64 {
    mu.mass(set)
}

/// `sup_E |μ(E) − ν(E)| = Σ_a max(μ(a) − ν(a), 0)` for probability measures.
///
/// Computed in the log domain so distances far below `f64::MIN_POSITIVE`
/// keep their exponent.
pub fn tv_distance(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<Mass, MeasureError> {
    mu.require_probability()?;
    nu.require_probability()?;
    let (a, b) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let mut positive = Vec::new();
    while i < a.len() || j < b.len() {
        let take_both = i < a.len() && j < b.len() && a[i].point.same_atom(b[j].point);
        if take_both {
            let heavy = -std::f64::consts::LN_2;
            let diff = if a[i].mass.ln() > heavy && b[j].mass.ln() > heavy {
                // μ(a) − ν(a) = ν(rest) − μ(rest); the rests are sums of light
                // atoms, so this avoids cancelling two numbers close to 1.
                let rest = |m: &[Atom], k: usize| -> Mass {
                    m.iter()
                        .enumerate()
                        .filter(|&(idx, _)| idx != k)
                        .map(|(_, x)| x.mass)
                        .sum()
                };
                LogNum::from(rest(b, j))
                    .sub(LogNum::from(rest(a, i)))
                    .to_mass()
            } else {
                a[i].mass.saturating_sub(b[j].mass)
            };
            positive.push(diff);
            i += 1;
            j += 1;
        } else if j >= b.len() || (i < a.len() && a[i].point < b[j].point) {
            positive.push(a[i].mass);
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(positive.into_iter().sum::<Mass>().min(Mass::ONE))
}

/// Atomwise `Σ wᵢ μᵢ`; weights must be nonnegative and sum to 1.
pub fn convex_combine(terms: &[(f64, &AtomicMeasure)]) -> Result<AtomicMeasure, MeasureError> {
    let mut total = 0.0;
    for &(w, _) in terms {
        if w.is_nan() || w < 0.0 {
            return Err(MeasureError::NegativeWeight(w));
        }
        total += w;
    }
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(MeasureError::WeightSum(total));
    }
    let atoms = terms.iter().flat_map(|&(w, mu)| {
        let w = Mass::new(w).unwrap_or(Mass::ZERO);
        mu.atoms().iter().map(move |a| (a.point, a.mass * w))
    });
    Ok(AtomicMeasure::new(atoms))
}

/// `∫ f dμ = Σ f(xᵢ) mᵢ`.
pub fn integrate(f: &TestFunction, mu: &AtomicMeasure) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| f.eval(a.point) * a.mass.value())
        .sum()
}

/// True iff the supports are disjoint.
pub fn is_singular(mu: &AtomicMeasure, nu: &AtomicMeasure) -> bool {
    mu.atoms()
        .iter()
        .all(|a| nu.atoms().iter().all(|b| !a.point.same_atom(b.point)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogX {
    Finite(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub log_x: LogX,
    pub mass: f64,
    pub log_mass: f64,
}

/// Wire form: `{"atoms":[{"log_x": number|"-inf", "mass": number, "log_mass": number}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

impl From<&AtomicMeasure> for MeasureJson {
    fn from(mu: &AtomicMeasure) -> MeasureJson {
        MeasureJson {
            atoms: mu
                .atoms()
                .iter()
                .map(|a| AtomJson {
                    log_x: if a.point.is_zero() {
                        LogX::Text("-inf".to_string())
                    } else {
                        LogX::Finite(a.point.log_value())
                    },
                    mass: a.mass.value(),
                    log_mass: a.mass.ln(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MeasureJson> for AtomicMeasure {
    type Error = MeasureError;

    fn try_from(json: MeasureJson) -> Result<AtomicMeasure, MeasureError> {
        let mut atoms = Vec::with_capacity(json.atoms.len());
        for a in json.atoms {
            let log_x = match a.log_x {
                LogX::Finite(v) => v,
                LogX::Text(ref s) if s == "-inf" => f64::NEG_INFINITY,
                LogX::Text(s) => return Err(MeasureError::BadJson(format!("log_x {s:?}"))),
            };
            let mass = Mass::from_ln(a.log_mass).ok_or(MeasureError::InvalidMass(a.mass))?;
            atoms.push((Point::from_log(log_x)?, mass));
        }
        Ok(AtomicMeasure::new(atoms))
    }
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MeasureJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<AtomicMeasure, D::Error> {
        let json = MeasureJson::deserialize(d)?;
        AtomicMeasure::try_from(json).map_err(serde::de::Error::custom)
    }
}
