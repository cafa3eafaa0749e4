#![allow(dead_code)]

use macc::{DemandVector, SystemParams};

/// K=5, k=1, z=2, d=(0,1,2,3,4).
pub const K5_LISTING: [&str; 10] = [
    "T[0]^0 = W[0,0]^2 + W[2,1]^4",
    "T[1]^0 = W[1,0]^3 + W[3,1]^0",
    "T[2]^0 = W[2,0]^4 + W[4,1]^1",
    "T[3]^0 = W[3,0]^0 + W[0,1]^2",
    "T[4]^0 = W[4,0]^1 + W[1,1]^3",
    "T[0]^1 = W[0,0]^3 + W[3,0]^4",
    "T[1]^1 = W[1,0]^4 + W[4,0]^0",
    "T[2]^1 = W[2,0]^0 + W[0,0]^1",
    "T[3]^1 = W[3,0]^1 + W[1,0]^2",
    "T[4]^1 = W[4,0]^2 + W[2,0]^3",
];

/// K=8, k=1, z=4, d=(0,...,7). Not in emission order.
pub const K8_LISTING: [&str; 24] = [
    "T[0,1]^0 = W[0,0]^3 + W[3,0]^5 + W[6,1]^0",
    "T[0,2]^0 = W[0,1]^3 + W[3,2]^6 + W[6,2]^0",
    "T[4,1]^0 = W[4,0]^7 + W[7,0]^1 + W[2,1]^4",
    "T[4,2]^0 = W[4,1]^7 + W[7,2]^2 + W[2,2]^4",
    "T[1,1]^0 = W[1,0]^4 + W[4,0]^6 + W[7,1]^1",
    "T[1,2]^0 = W[1,1]^4 + W[4,2]^7 + W[7,2]^1",
    "T[5,1]^0 = W[5,0]^0 + W[0,0]^2 + W[3,1]^5",
    "T[5,2]^0 = W[5,1]^0 + W[0,2]^3 + W[3,2]^5",
    "T[2,1]^0 = W[2,0]^5 + W[5,0]^7 + W[0,1]^2",
    "T[2,2]^0 = W[2,1]^5 + W[5,2]^0 + W[0,2]^2",
    "T[6,1]^0 = W[6,0]^1 + W[1,0]^3 + W[4,1]^6",
    "T[6,2]^0 = W[6,1]^1 + W[1,2]^4 + W[4,2]^6",
    "T[3,1]^0 = W[3,0]^6 + W[6,0]^0 + W[1,1]^3",
    "T[3,2]^0 = W[3,1]^6 + W[6,2]^1 + W[1,2]^3",
    "T[7,1]^0 = W[7,0]^2 + W[2,0]^4 + W[5,1]^7",
    "T[7,2]^0 = W[7,1]^2 + W[2,2]^5 + W[5,2]^7",
    "T[0]^1 = W[0,0]^4 + W[4,0]^5",
    "T[1]^1 = W[1,0]^5 + W[5,0]^6",
    "T[2]^1 = W[2,0]^6 + W[6,0]^7",
    "T[3]^1 = W[3,0]^7 + W[7,0]^0",
    "T[4]^1 = W[4,0]^0 + W[0,0]^1",
    "T[5]^1 = W[5,0]^1 + W[1,0]^2",
    "T[6]^1 = W[6,0]^2 + W[2,0]^3",
    "T[7]^1 = W[7,0]^3 + W[3,0]^4",
];

/// K=9, k=2, z=2, d=(0,2,4,6,8,1,3,5,7).
pub const K9_DEMANDS: [usize; 9] = [0, 2, 4, 6, 8, 1, 3, 5, 7];
pub const K9_LISTING: [&str; 27] = [
    "T[0]^0 = W[0,0]^3 + W[3,1]^6 + W[6,2]^0",
    "T[1]^0 = W[1,0]^4 + W[4,1]^7 + W[7,2]^1",
    "T[2]^0 = W[2,0]^5 + W[5,1]^8 + W[8,2]^2",
    "T[3]^0 = W[3,0]^6 + W[6,1]^0 + W[0,2]^3",
    "T[4]^0 = W[4,0]^7 + W[7,1]^1 + W[1,2]^4",
    "T[5]^0 = W[5,0]^8 + W[8,1]^2 + W[2,2]^5",
    "T[6]^0 = W[6,0]^0 + W[0,1]^3 + W[3,2]^6",
    "T[7]^0 = W[7,0]^1 + W[1,1]^4 + W[4,2]^7",
    "T[8]^0 = W[8,0]^2 + W[2,1]^5 + W[5,2]^8",
    "T[0]^1 = W[0,0]^4 + W[4,0]^6",
    "T[1]^1 = W[1,0]^5 + W[5,0]^7",
    "T[2]^1 = W[2,0]^6 + W[6,0]^8",
    "T[3]^1 = W[3,0]^7 + W[7,0]^0",
    "T[4]^1 = W[4,0]^8 + W[8,0]^1",
    "T[5]^1 = W[5,0]^0 + W[0,0]^2",
    "T[6]^1 = W[6,0]^1 + W[1,0]^3",
    "T[7]^1 = W[7,0]^2 + W[2,0]^4",
    "T[8]^1 = W[8,0]^3 + W[3,0]^5",
    "T[0]^2 = W[0,0]^5 + W[5,0]^6",
    "T[1]^2 = W[1,0]^6 + W[6,0]^7",
    "T[2]^2 = W[2,0]^7 + W[7,0]^8",
    "T[3]^2 = W[3,0]^8 + W[8,0]^0",
    "T[4]^2 = W[4,0]^0 + W[0,0]^1",
    "T[5]^2 = W[5,0]^1 + W[1,0]^2",
    "T[6]^2 = W[6,0]^2 + W[2,0]^3",
    "T[7]^2 = W[7,0]^3 + W[3,0]^4",
    "T[8]^2 = W[8,0]^4 + W[4,0]^5",
];

/// K=5, k=1, z=2 decoding: (user, sub-file, part, source symbol).
pub const K5_DECODE_TABLE: [(usize, usize, usize, &str); 20] = [
    (0, 3, 0, "T[3]^0"),
    (0, 3, 1, "T[1]^0"),
    (0, 2, 0, "T[2]^1"),
    (0, 4, 0, "T[1]^1"),
    (1, 4, 0, "T[4]^0"),
    (1, 4, 1, "T[2]^0"),
    (1, 3, 0, "T[3]^1"),
    (1, 0, 0, "T[2]^1"),
    (2, 0, 0, "T[0]^0"),
    (2, 0, 1, "T[3]^0"),
    (2, 4, 0, "T[4]^1"),
    (2, 1, 0, "T[3]^1"),
    (3, 1, 0, "T[1]^0"),
    (3, 1, 1, "T[4]^0"),
    (3, 0, 0, "T[0]^1"),
    (3, 2, 0, "T[4]^1"),
    (4, 2, 0, "T[2]^0"),
    (4, 2, 1, "T[0]^0"),
    (4, 1, 0, "T[1]^1"),
    (4, 3, 0, "T[0]^1"),
];

/// User 0 in the K=8 instance: (sub-file, part, source).
pub const K8_USER0_SOURCES: [(usize, usize, &str); 8] = [
    (5, 0, "T[5,1]^0"),
    (5, 1, "T[5,2]^0"),
    (5, 2, "T[2,2]^0"),
    (6, 0, "T[3,1]^0"),
    (6, 1, "T[0,1]^0"),
    (6, 2, "T[0,2]^0"),
    (4, 0, "T[4]^1"),
    (7, 0, "T[3]^1"),
];

/// User 0 in the K=9 instance: (sub-file, part, source).
pub const K9_USER0_SOURCES: [(usize, usize, &str); 7] = [
    (6, 0, "T[6]^0"),
    (6, 1, "T[3]^0"),
    (6, 2, "T[0]^0"),
    (5, 0, "T[5]^1"),
    (7, 0, "T[3]^1"),
    (4, 0, "T[4]^2"),
    (8, 0, "T[3]^2"),
];

pub fn params(users: usize, k: usize, z: usize) -> SystemParams {
    SystemParams::new(users, users, k, z).unwrap()
}

pub fn k5_z2() -> (SystemParams, DemandVector) {
    let p = params(5, 1, 2);
    let d = DemandVector::identity(&p);
    (p, d)
}

pub fn k8_z4() -> (SystemParams, DemandVector) {
    let p = params(8, 1, 4);
    let d = DemandVector::identity(&p);
    (p, d)
}

pub fn k9_z2() -> (SystemParams, DemandVector) {
    let p = params(9, 2, 2);
    let d = DemandVector::new(K9_DEMANDS.to_vec(), &p).unwrap();
    (p, d)
}

/// Every instance with `K` in `users` that the schedule supports.
pub fn valid_instances(users: std::ops::RangeInclusive<usize>) -> Vec<SystemParams> {
    let mut out = Vec::new();
    for n in users {
        for k in 1..=n {
            for z in 2..=n {
                if let Ok(p) = SystemParams::new(n, n, k, z) {
                    out.push(p);
                }
            }
        }
    }
    out
}

pub fn q(n: i64, d: i64) -> num_rational::BigRational {
    num_rational::BigRational::new(n.into(), d.into())
}
