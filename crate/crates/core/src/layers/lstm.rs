//! Standard (non-peephole) LSTM cell with mask gating and
//! backpropagation-through-time. Gate order is fixed as
//! [input, forget, cell-candidate, output].

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{sigmoid_scalar, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    /// Input-to-hidden weights, 4h x k.
    pub w_ih: Matrix,
    /// Hidden-to-hidden weights, 4h x h.
    pub w_hh: Matrix,
    /// Gate biases, 4h. The forget section starts at 1.0.
    pub bias: Vector,
    pub hidden: usize,
}

/// Cached values for one processed position.
#[derive(Debug, Clone)]
struct Step {
    masked: bool,
    gate_i: Vec<f64>,
    gate_f: Vec<f64>,
    gate_g: Vec<f64>,
    gate_o: Vec<f64>,
    cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    hidden: Vec<f64>,
}

/// Forward cache of one directional sweep; `order[s]` is the sequence position
/// processed at step `s`.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    order: Vec<usize>,
    steps: Vec<Step>,
}

impl LstmTrace {
    /// Hidden state at sequence position `pos`.
    pub fn hidden_at(&self, pos: usize) -> &[f64] {
        let step = self.order.iter().position(|p| *p == pos).expect("pos in trace");
        &self.steps[step].hidden
    }

    /// Hidden states laid out by sequence position.
    pub fn hidden_by_pos(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&[]; self.order.len()];
        for (s, &pos) in self.order.iter().enumerate() {
            out[pos] = &self.steps[s].hidden;
        }
        out
    }
}

/// Parameter gradients for one cell.
#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub w_ih: Matrix,
    pub w_hh: Matrix,
    pub bias: Vector,
}

impl LstmGrads {
    pub fn zeros_like(cell: &LstmCell) -> Self {
        Self {
            w_ih: Matrix::zeros(cell.w_ih.rows, cell.w_ih.cols),
            w_hh: Matrix::zeros(cell.w_hh.rows, cell.w_hh.cols),
            bias: Vector::zeros(cell.bias.len()),
        }
    }
}

impl LstmCell {
    pub fn init(input_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut w_ih = Matrix::zeros(4 * hidden, input_dim);
        for v in &mut w_ih.data {
            *v = rng.random_range(-0.08..0.08);
        }
        let mut w_hh = Matrix::zeros(4 * hidden, hidden);
        for v in &mut w_hh.data {
            *v = rng.random_range(-0.08..0.08);
        }
        let mut bias = Vector::zeros(4 * hidden);
        // Forget-gate bias at 1.0 keeps early memory open.
        for v in &mut bias.data[hidden..2 * hidden] {
            *v = 1.0;
        }
        Self {
            w_ih,
            w_hh,
            bias,
            hidden,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.cols
    }

    fn check_shapes(&self, inputs: &[Vec<f64>], mask: &[bool]) -> Result<()> {
        if inputs.len() != mask.len() {
            return Err(Error::Shape(format!(
                "lstm: {} inputs vs {} mask entries",
                inputs.len(),
                mask.len()
            )));
        }
        for x in inputs {
            if x.len() != self.input_dim() {
                return Err(Error::Shape(format!(
                    "lstm: input width {} does not match cell input dim {}",
                    x.len(),
                    self.input_dim()
                )));
            }
        }
        Ok(())
    }

    /// One directional sweep over `inputs`. Masked positions copy hidden and
    /// cell state through unchanged, so padding never alters state.
    pub fn forward(&self, inputs: &[Vec<f64>], mask: &[bool], reverse: bool) -> Result<LstmTrace> {
        self.check_shapes(inputs, mask)?;
        let order: Vec<usize> = if reverse {
            (0..inputs.len()).rev().collect()
        } else {
            (0..inputs.len()).collect()
        };
        let h = self.hidden;
        let mut hidden_prev = vec![0.0; h];
        let mut cell_prev = vec![0.0; h];
        let mut steps = Vec::with_capacity(order.len());
        let mut gates = vec![0.0; 4 * h];
        for &pos in &order {
            if !mask[pos] {
                steps.push(Step {
                    masked: true,
                    gate_i: Vec::new(),
                    gate_f: Vec::new(),
                    gate_g: Vec::new(),
                    gate_o: Vec::new(),
                    cell: cell_prev.clone(),
                    tanh_cell: Vec::new(),
                    hidden: hidden_prev.clone(),
                });
                continue;
            }
            self.w_ih.matvec_into(&inputs[pos], &mut gates);
            let mut recur = vec![0.0; 4 * h];
            self.w_hh.matvec_into(&hidden_prev, &mut recur);
            for ((g, r), b) in gates.iter_mut().zip(&recur).zip(&self.bias.data) {
                *g += r + b;
            }
            let gate_i: Vec<f64> = gates[..h].iter().map(|z| sigmoid_scalar(*z)).collect();
            let gate_f: Vec<f64> = gates[h..2 * h].iter().map(|z| sigmoid_scalar(*z)).collect();
            let gate_g: Vec<f64> = gates[2 * h..3 * h].iter().map(|z| z.tanh()).collect();
            let gate_o: Vec<f64> = gates[3 * h..].iter().map(|z| sigmoid_scalar(*z)).collect();
            let cell: Vec<f64> = (0..h)
                .map(|j| gate_f[j] * cell_prev[j] + gate_i[j] * gate_g[j])
                .collect();
            let tanh_cell: Vec<f64> = cell.iter().map(|c| c.tanh()).collect();
            let hidden: Vec<f64> = (0..h).map(|j| gate_o[j] * tanh_cell[j]).collect();
            hidden_prev = hidden.clone();
            cell_prev = cell.clone();
            steps.push(Step {
                masked: false,
                gate_i,
                gate_f,
                gate_g,
                gate_o,
                cell,
                tanh_cell,
                hidden,
            });
        }
        Ok(LstmTrace { order, steps })
    }

    /// BPTT over a forward trace. `d_hidden[pos]` holds the loss gradient
    /// arriving at this direction's hidden output for each position; input
    /// gradients are accumulated into `d_inputs` and parameter gradients into
    /// `grads`.
    pub fn backward(
        &self,
        inputs: &[Vec<f64>],
        trace: &LstmTrace,
        d_hidden: &[Vec<f64>],
        grads: &mut LstmGrads,
        d_inputs: &mut [Vec<f64>],
    ) {
        let h = self.hidden;
        let n = trace.steps.len();
        let mut dh_carry = vec![0.0; h];
        let mut dc_carry = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for s in (0..n).rev() {
            let pos = trace.order[s];
            let step = &trace.steps[s];
            let dh: Vec<f64> = d_hidden[pos].iter().zip(&dh_carry).map(|(a, b)| a + b).collect();
            if step.masked {
                // h_s = h_{s-1}, c_s = c_{s-1}: gradients flow straight through.
                dh_carry = dh;
                continue;
            }
            let (hidden_prev, cell_prev): (&[f64], &[f64]) = if s == 0 {
                (&[], &[])
            } else {
                (&trace.steps[s - 1].hidden, &trace.steps[s - 1].cell)
            };
            let mut dc = dc_carry.clone();
            for j in 0..h {
                let tc = step.tanh_cell[j];
                dc[j] += dh[j] * step.gate_o[j] * (1.0 - tc * tc);
            }
            for j in 0..h {
                let c_prev_j = if s == 0 { 0.0 } else { cell_prev[j] };
                let di = dc[j] * step.gate_g[j];
                let df = dc[j] * c_prev_j;
                let dg = dc[j] * step.gate_i[j];
                let do_ = dh[j] * step.tanh_cell[j];
                dz[j] = di * step.gate_i[j] * (1.0 - step.gate_i[j]);
                dz[h + j] = df * step.gate_f[j] * (1.0 - step.gate_f[j]);
                dz[2 * h + j] = dg * (1.0 - step.gate_g[j] * step.gate_g[j]);
                dz[3 * h + j] = do_ * step.gate_o[j] * (1.0 - step.gate_o[j]);
            }
            grads.w_ih.add_outer(&dz, &inputs[pos]);
            if s > 0 {
                grads.w_hh.add_outer(&dz, hidden_prev);
            }
            for (b, d) in grads.bias.data.iter_mut().zip(&dz) {
                *b += d;
            }
            self.w_ih.matvec_t_acc(&dz, &mut d_inputs[pos]);
            // Next carries: gradient to h_{s-1} through W_hh, to c_{s-1} through the forget gate.
            dh_carry = vec![0.0; h];
            self.w_hh.matvec_t_acc(&dz, &mut dh_carry);
            for j in 0..h {
                dc_carry[j] = dc[j] * step.gate_f[j];
            }
        }
    }
}
