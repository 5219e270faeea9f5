use crate::case_io::LimitHandling;
use crate::model::{Case, ExpansionPlan};

/// Decode `bits` (most significant first) linearly onto `[lo, hi]`.
pub fn decode_field(bits: &[bool], lo: f64, hi: f64, l: usize) -> f64 {
    let dv = bits
        .iter()
        .take(l)
        .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    lo + (hi - lo) / ((1u64 << l) - 1) as f64 * dv as f64
}

fn encode_field(value: f64, lo: f64, hi: f64, l: usize) -> Vec<bool> {
    let max = (1u64 << l) - 1;
    let dv = (((value - lo) / (hi - lo)) * max as f64).round().clamp(0.0, max as f64) as u64;
    (0..l).rev().map(|k| (dv >> k) & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub offset: usize,
    pub width: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Named fields laid end to end in a chromosome.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    pub fields: Vec<Field>,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.fields.last().map_or(0, |f| f.offset + f.width)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, name: impl Into<String>, width: usize, lo: f64, hi: f64) {
        let offset = self.len();
        self.fields.push(Field {
            name: name.into(),
            offset,
            width,
            lo,
            hi,
        });
    }

    pub fn decode(&self, bits: &[bool]) -> Vec<f64> {
        self.fields
            .iter()
            .map(|f| decode_field(&bits[f.offset..f.offset + f.width], f.lo, f.hi, f.width))
            .collect()
    }

    pub fn encode(&self, values: &[f64]) -> Vec<bool> {
        self.fields
            .iter()
            .zip(values)
            .flat_map(|(f, &v)| encode_field(v, f.lo, f.hi, f.width))
            .collect()
    }
}

/// Chromosome layout of an expansion plan: per stage, one field per
/// candidate plant followed by one field per candidate corridor. Fields
/// decode to integer counts `0 ..= 2^width - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEncoding {
    pub stages: usize,
    pub gen_bits: usize,
    pub line_bits: usize,
    pub handling: LimitHandling,
    n_gen: usize,
    n_line: usize,
    layout: Layout,
}

impl PlanEncoding {
    pub fn new(case: &Case, stages: usize, gen_bits: usize, line_bits: usize, handling: LimitHandling) -> Self {
        let n_gen = if gen_bits > 0 { case.gen_candidates.len() } else { 0 };
        let n_line = if line_bits > 0 { case.line_candidates.len() } else { 0 };
        let mut layout = Layout::default();
        for t in 1..=stages {
            for c in case.gen_candidates.iter().take(n_gen) {
                let hi = ((1u64 << gen_bits) - 1) as f64;
                layout.push(format!("t{}:gen:{}", t, c.name), gen_bits, 0.0, hi);
            }
            for l in case.line_candidates.iter().take(n_line) {
                let hi = ((1u64 << line_bits) - 1) as f64;
                layout.push(format!("t{}:line:{}", t, l.label()), line_bits, 0.0, hi);
            }
        }
        PlanEncoding {
            stages,
            gen_bits,
            line_bits,
            handling,
            n_gen,
            n_line,
            layout,
        }
    }

    /// Two bits per plant per stage.
    pub fn generation(case: &Case, stages: usize, handling: LimitHandling) -> Self {
        Self::new(case, stages, 2, 0, handling)
    }

    /// Two bits per plant and five per corridor, per stage.
    pub fn composite(case: &Case, stages: usize, handling: LimitHandling) -> Self {
        Self::new(case, stages, 2, 5, handling)
    }

    /// Single-stage transmission layout with four bits per corridor.
    pub fn transmission(case: &Case, handling: LimitHandling) -> Self {
        Self::new(case, 1, 0, 4, handling)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    /// Decode to a plan. With [`LimitHandling::Clamp`] each stage's
    /// additions are cut so cumulative totals stay within the construction
    /// and corridor limits.
    pub fn decode(&self, case: &Case, bits: &[bool]) -> ExpansionPlan {
        let values = self.layout.decode(bits);
        let mut plan = ExpansionPlan::empty(case, self.stages);
        let per_stage = self.n_gen + self.n_line;
        let mut gen_used = vec![0u32; case.gen_candidates.len()];
        let mut line_used = vec![0u32; case.line_candidates.len()];
        let clamp = self.handling == LimitHandling::Clamp;
        for t in 0..self.stages {
            let row = &values[t * per_stage..(t + 1) * per_stage];
            for i in 0..self.n_gen {
                let mut u = row[i].round() as u32;
                if clamp {
                    u = u.min(case.gen_candidates[i].max_units.saturating_sub(gen_used[i]));
                }
                gen_used[i] += u;
                plan.gen[t][i] = u;
            }
            for k in 0..self.n_line {
                let mut n = row[self.n_gen + k].round() as u32;
                if clamp {
                    n = n.min(case.line_candidates[k].max_add.saturating_sub(line_used[k]));
                }
                line_used[k] += n;
                plan.lines[t][k] = n;
            }
        }
        plan
    }

    /// Encode a plan; counts too large for a field saturate it.
    pub fn encode(&self, plan: &ExpansionPlan) -> Vec<bool> {
        let mut values = Vec::with_capacity(self.layout.fields.len());
        for t in 0..self.stages {
            for i in 0..self.n_gen {
                values.push(plan.gen.get(t).map_or(0, |s| s[i]) as f64);
            }
            for k in 0..self.n_line {
                values.push(plan.lines.get(t).map_or(0, |s| s[k]) as f64);
            }
        }
        self.layout.encode(&values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_io::bundled_case;

    #[test]
    fn decode_examples() {
        assert_eq!(decode_field(&[true; 4], 0.0, 15.0, 4), 15.0);
        assert_eq!(decode_field(&[false; 4], 0.0, 15.0, 4), 0.0);
        let v = decode_field(&[true, false], 1.0, 3.0, 2);
        assert!((v - (1.0 + 2.0 / 3.0 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn layout_lengths() {
        let c = bundled_case("ieee24");
        assert_eq!(PlanEncoding::generation(&c, 3, LimitHandling::Clamp).len(), 126);
        assert_eq!(PlanEncoding::composite(&c, 3, LimitHandling::Clamp).len(), 396);
        assert_eq!(PlanEncoding::composite(&c, 1, LimitHandling::Clamp).len(), 132);
        let g = bundled_case("garver6");
        assert_eq!(PlanEncoding::transmission(&g, LimitHandling::Clamp).len(), 60);
    }

    #[test]
    fn zero_chromosome_is_empty_plan() {
        let c = bundled_case("ieee24");
        let e = PlanEncoding::composite(&c, 3, LimitHandling::Clamp);
        assert!(e.decode(&c, &vec![false; e.len()]).is_empty());
    }

    #[test]
    fn clamp_to_corridor_limit() {
        let g = bundled_case("garver6");
        let e = PlanEncoding::transmission(&g, LimitHandling::Clamp);
        let p = e.decode(&g, &[true; 60]);
        assert!(p.lines[0].iter().all(|&n| n == 5));
        let e = PlanEncoding::transmission(&g, LimitHandling::Penalize);
        let p = e.decode(&g, &[true; 60]);
        assert!(p.lines[0].iter().all(|&n| n == 15));
    }
}
