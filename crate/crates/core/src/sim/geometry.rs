//! Lattice rotations and the small float linear algebra used by forward kinematics.
//!
//! Every module has a local frame whose +X axis points away from its parent
//! connection. A servo hinges about its local +Y axis.

pub type IVec3 = [i32; 3];
pub type Vec3 = [f64; 3];

/// Proper rotation with integer entries, stored column-wise
/// (`cols[k]` is the image of the k-th basis vector).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rot {
    cols: [IVec3; 3],
}

impl Rot {
    pub const IDENTITY: Rot = Rot { cols: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] };

    /// Quarter turns about +X.
    pub fn about_x(quarter_turns: u8) -> Rot {
        match quarter_turns % 4 {
            0 => Self::IDENTITY,
            1 => Rot { cols: [[1, 0, 0], [0, 0, 1], [0, -1, 0]] },
            2 => Rot { cols: [[1, 0, 0], [0, -1, 0], [0, 0, -1]] },
            _ => Rot { cols: [[1, 0, 0], [0, 0, -1], [0, 1, 0]] },
        }
    }

    /// The rotation taking +X onto the face direction `d` (an axis unit vector).
    pub fn onto_face(d: IVec3) -> Rot {
        match d {
            [1, 0, 0] => Self::IDENTITY,
            [-1, 0, 0] => Rot { cols: [[-1, 0, 0], [0, -1, 0], [0, 0, 1]] },
            [0, 1, 0] => Rot { cols: [[0, 1, 0], [-1, 0, 0], [0, 0, 1]] },
            [0, -1, 0] => Rot { cols: [[0, -1, 0], [1, 0, 0], [0, 0, 1]] },
            [0, 0, 1] => Rot { cols: [[0, 0, 1], [0, 1, 0], [-1, 0, 0]] },
            [0, 0, -1] => Rot { cols: [[0, 0, -1], [0, 1, 0], [1, 0, 0]] },
            other => panic!("not an axis direction: {other:?}"),
        }
    }

    pub fn apply(&self, v: IVec3) -> IVec3 {
        let mut out = [0; 3];
        for (k, &vk) in v.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.cols[k]) {
                *o += vk * c;
            }
        }
        out
    }

    pub fn compose(&self, inner: &Rot) -> Rot {
        Rot { cols: inner.cols.map(|c| self.apply(c)) }
    }

    pub fn to_mat3(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (col, v) in self.cols.iter().enumerate() {
            for row in 0..3 {
                m[row][col] = v[row] as f64;
            }
        }
        Mat3(m)
    }
}

/// Row-major 3x3 float matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rotation by `theta` about +Y.
    pub fn rot_y(theta: f64) -> Mat3 {
        let (s, c) = theta.sin_cos();
        Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[r][0] * o.0[0][c] + self.0[r][1] * o.0[1][c] + self.0[r][2] * o.0[2][c];
            }
        }
        Mat3(m)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn col(&self, c: usize) -> Vec3 {
        [self.0[0][c], self.0[1][c], self.0[2][c]]
    }
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn to_vec3(v: IVec3) -> Vec3 {
    v.map(f64::from)
}
