use rand::Rng;

use super::{Network, ParamMut};

/// 2-D convolution over CHW-packed f64 buffers.
#[derive(Clone, Debug)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub ksize: usize,
    pub stride: usize,
    pub pad: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    w: Vec<f64>,
    b: Vec<f64>,
    gw: Vec<f64>,
    gb: Vec<f64>,
}

impl Conv2d {
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        ksize: usize,
        stride: usize,
        pad: usize,
        in_h: usize,
        in_w: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let fan_in = in_ch * ksize * ksize;
        let std = (1.0 / fan_in as f64).sqrt();
        let w = (0..out_ch * fan_in).map(|_| crate::rng::normal(rng) * std).collect();
        let out_h = (in_h + 2 * pad - ksize) / stride + 1;
        let out_w = (in_w + 2 * pad - ksize) / stride + 1;
        Conv2d {
            in_ch,
            out_ch,
            ksize,
            stride,
            pad,
            in_h,
            in_w,
            out_h,
            out_w,
            w,
            b: vec![0.0; out_ch],
            gw: vec![0.0; out_ch * fan_in],
            gb: vec![0.0; out_ch],
        }
    }

    pub fn out_len(&self) -> usize {
        self.out_ch * self.out_h * self.out_w
    }

    pub fn in_len(&self) -> usize {
        self.in_ch * self.in_h * self.in_w
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_len());
        let (ih, iw, k) = (self.in_h, self.in_w, self.ksize);
        let mut y = vec![0.0; self.out_len()];
        for oc in 0..self.out_ch {
            let wslab = &self.w[oc * self.in_ch * k * k..(oc + 1) * self.in_ch * k * k];
            for oy in 0..self.out_h {
                for ox in 0..self.out_w {
                    let mut acc = self.b[oc];
                    for ic in 0..self.in_ch {
                        let xin = &x[ic * ih * iw..(ic + 1) * ih * iw];
                        let wk = &wslab[ic * k * k..(ic + 1) * k * k];
                        for ky in 0..k {
                            let iy = (oy * self.stride + ky) as isize - self.pad as isize;
                            if iy < 0 || iy >= ih as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let ix = (ox * self.stride + kx) as isize - self.pad as isize;
                                if ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                acc += wk[ky * k + kx] * xin[iy as usize * iw + ix as usize];
                            }
                        }
                    }
                    y[oc * self.out_h * self.out_w + oy * self.out_w + ox] = acc;
                }
            }
        }
        y
    }

    /// Accumulates weight/bias gradients and returns dL/dx.
    pub fn backward(&mut self, x: &[f64], dy: &[f64]) -> Vec<f64> {
        debug_assert_eq!(dy.len(), self.out_len());
        let (ih, iw, k) = (self.in_h, self.in_w, self.ksize);
        let mut dx = vec![0.0; self.in_len()];
        for oc in 0..self.out_ch {
            let wslab = &self.w[oc * self.in_ch * k * k..(oc + 1) * self.in_ch * k * k];
            let gslab_base = oc * self.in_ch * k * k;
            for oy in 0..self.out_h {
                for ox in 0..self.out_w {
                    let g = dy[oc * self.out_h * self.out_w + oy * self.out_w + ox];
                    if g == 0.0 {
                        continue;
                    }
                    self.gb[oc] += g;
                    for ic in 0..self.in_ch {
                        let xin = &x[ic * ih * iw..(ic + 1) * ih * iw];
                        let dxin = ic * ih * iw;
                        let wk = &wslab[ic * k * k..(ic + 1) * k * k];
                        let gwk = gslab_base + ic * k * k;
                        for ky in 0..k {
                            let iy = (oy * self.stride + ky) as isize - self.pad as isize;
                            if iy < 0 || iy >= ih as isize {
                                continue;
                            }
                            for kx in 0..k {
                                let ix = (ox * self.stride + kx) as isize - self.pad as isize;
                                if ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                let ii = iy as usize * iw + ix as usize;
                                self.gw[gwk + ky * k + kx] += g * xin[ii];
                                dx[dxin + ii] += g * wk[ky * k + kx];
                            }
                        }
                    }
                }
            }
        }
        dx
    }
}

impl Network for Conv2d {
    fn visit(&mut self, prefix: &str, f: &mut dyn FnMut(ParamMut<'_>)) {
        f(ParamMut {
            name: format!("{prefix}w"),
            shape: vec![self.out_ch, self.in_ch, self.ksize, self.ksize],
            data: &mut self.w,
            grad: &mut self.gw,
        });
        f(ParamMut {
            name: format!("{prefix}b"),
            shape: vec![self.out_ch],
            data: &mut self.b,
            grad: &mut self.gb,
        });
    }
}

/// Nearest-neighbor 2x upsampling, CHW layout. Parameter-free.
#[derive(Clone, Copy, Debug)]
pub struct Upsample2x {
    pub ch: usize,
    pub in_h: usize,
    pub in_w: usize,
}

impl Upsample2x {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let (h, w) = (self.in_h, self.in_w);
        debug_assert_eq!(x.len(), self.ch * h * w);
        let mut y = vec![0.0; self.ch * 4 * h * w];
        for c in 0..self.ch {
            for iy in 0..h {
                for ix in 0..w {
                    let v = x[c * h * w + iy * w + ix];
                    let base = c * 4 * h * w;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            y[base + (2 * iy + dy) * 2 * w + 2 * ix + dx] = v;
                        }
                    }
                }
            }
        }
        y
    }

    pub fn backward(&self, dy: &[f64]) -> Vec<f64> {
        let (h, w) = (self.in_h, self.in_w);
        let mut dx = vec![0.0; self.ch * h * w];
        for c in 0..self.ch {
            for iy in 0..h {
                for ix in 0..w {
                    let base = c * 4 * h * w;
                    let mut acc = 0.0;
                    for ddy in 0..2 {
                        for ddx in 0..2 {
                            acc += dy[base + (2 * iy + ddy) * 2 * w + 2 * ix + ddx];
                        }
                    }
                    dx[c * h * w + iy * w + ix] = acc;
                }
            }
        }
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;
    use crate::rng::{normal_vec, stream};

    #[test]
    fn conv_shapes() {
        let mut rng = stream(1, "conv");
        let c = Conv2d::new(3, 4, 3, 2, 1, 16, 16, &mut rng);
        assert_eq!((c.out_h, c.out_w), (8, 8));
        assert_eq!(c.forward(&vec![0.0; c.in_len()]).len(), 4 * 8 * 8);
    }

    #[test]
    fn conv_backward_matches_finite_difference() {
        let mut rng = stream(2, "conv-fd");
        let mut c = Conv2d::new(2, 3, 3, 2, 1, 6, 6, &mut rng);
        let x = normal_vec(&mut rng, c.in_len());
        let y = c.forward(&x);
        let dy: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        c.zero_grads();
        c.backward(&x, &dy);
        let report = grad_check(
            &mut c,
            |n| n.forward(&x).iter().map(|v| v * v).sum::<f64>(),
            1e-6,
        );
        assert!(report.max_rel_err < 1e-6, "{report:?}");
    }

    #[test]
    fn conv_input_grad_matches_finite_difference() {
        let mut rng = stream(4, "conv-dx");
        let mut c = Conv2d::new(1, 2, 3, 1, 1, 5, 5, &mut rng);
        let mut x = normal_vec(&mut rng, c.in_len());
        let y = c.forward(&x);
        let dy: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        c.zero_grads();
        let dx = c.backward(&x, &dy);
        let eps = 1e-6;
        for i in [0usize, 7, 12, 24] {
            x[i] += eps;
            let lp: f64 = c.forward(&x).iter().map(|v| v * v).sum();
            x[i] -= 2.0 * eps;
            let lm: f64 = c.forward(&x).iter().map(|v| v * v).sum();
            x[i] += eps;
            let fd = (lp - lm) / (2.0 * eps);
            assert!((dx[i] - fd).abs() / fd.abs().max(1e-8) < 1e-6);
        }
    }

    #[test]
    fn upsample_round_trip_grad() {
        let up = Upsample2x { ch: 1, in_h: 2, in_w: 2 };
        let y = up.forward(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(y.len(), 16);
        assert_eq!(y[0], 1.0);
        assert_eq!(y[1], 1.0);
        assert_eq!(y[5], 2.0);
        let dx = up.backward(&vec![1.0; 16]);
        assert_eq!(dx, vec![4.0; 4]);
    }
}
