use super::FrameError;

/// Ground-truth label of one annotated pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Background,
    Foreground,
    DontCare,
}

impl Label {
    /// Mask file encoding: 0 background, 255 foreground, 128 don't-care.
    pub fn from_byte(b: u8) -> Option<Label> {
        match b {
            0 => Some(Label::Background),
            255 => Some(Label::Foreground),
            128 => Some(Label::DontCare),
            _ => None,
        }
    }

    pub fn to_byte(self) -> u8 {
        match self {
            Label::Background => 0,
            Label::Foreground => 255,
            Label::DontCare => 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriStateMask {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl TriStateMask {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self, FrameError> {
        if labels.len() != width * height {
            return Err(FrameError::SampleCount {
                expected: width * height,
                found: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        Self {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    /// Foreground pixels as a binary mask; don't-care maps to false.
    pub fn foreground(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| l == Label::Foreground).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, FrameError> {
        if bits.len() != width * height {
            return Err(FrameError::SampleCount {
                expected: width * height,
                found: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_clear(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert!(self.same_shape(other));
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        assert!(self.same_shape(other));
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// Intersection over union; 1 when both masks are empty.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        let inter = self.intersection_count(other);
        let union = self.count() + other.count() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Coordinates of set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Mean position of the set pixels, if any.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let mut n = 0usize;
        let (mut sx, mut sy) = (0.0, 0.0);
        for (x, y) in self.iter_set() {
            n += 1;
            sx += x as f64;
            sy += y as f64;
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    pub fn to_tristate(&self) -> TriStateMask {
        TriStateMask {
            width: self.width,
            height: self.height,
            labels: self
                .bits
                .iter()
                .map(|&b| if b { Label::Foreground } else { Label::Background })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_bytes() {
        for l in [Label::Background, Label::Foreground, Label::DontCare] {
            assert_eq!(Label::from_byte(l.to_byte()), Some(l));
        }
        assert_eq!(Label::from_byte(7), None);
    }

    #[test]
    fn mask_set_ops() {
        let mut a = BinaryMask::new(4, 2);
        a.set(0, 0, true);
        a.set(3, 1, true);
        let mut b = BinaryMask::new(4, 2);
        b.set(3, 1, true);
        b.set(1, 0, true);
        assert_eq!(a.intersection_count(&b), 1);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
        a.union_with(&b);
        assert_eq!(a.count(), 3);
        assert_eq!(a.iter_set().collect::<Vec<_>>(), vec![(0, 0), (1, 0), (3, 1)]);
        assert_eq!(BinaryMask::new(3, 3).centroid(), None);
    }
}
