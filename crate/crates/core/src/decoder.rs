//! Honest broadcasts and per-client minimum-distance decoding.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{EncodingMatrix, LocalCode};
use crate::field::{FieldElement, FieldError, FieldVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("expected a vector of length {expected}, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("client index {} out of range 1..={n}", client + 1)]
    ClientOutOfRange { client: usize, n: usize },
    #[error("held packets for client {} must be exactly its holding set", client + 1)]
    HeldMismatch { client: usize },
    #[error("decoding needs {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Values of the packets one client holds, keyed by 0-based packet index.
pub type HeldPackets = BTreeMap<usize, FieldElement>;

/// The held packets of `client` read off a full packet vector.
pub fn held_packets(encoding: &EncodingMatrix, x: &FieldVector, client: usize) -> HeldPackets {
    encoding
        .problem()
        .holdings(client)
        .iter()
        .map(|&i| (i, x.get(i)))
        .collect()
}

fn check_len(v: &FieldVector, expected: usize, encoding: &EncodingMatrix) -> Result<(), DecodeError> {
    if v.field() != encoding.field() {
        return Err(FieldError::FieldMismatch(encoding.field().modulus(), v.field().modulus()).into());
    }
    if v.len() != expected {
        return Err(DecodeError::Length {
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

fn check_client(encoding: &EncodingMatrix, client: usize) -> Result<(), DecodeError> {
    let n = encoding.problem().n();
    if client >= n {
        return Err(DecodeError::ClientOutOfRange { client, n });
    }
    Ok(())
}

/// `y_j = sum_i a[i][j] x_i`.
pub fn encode_broadcast(
    encoding: &EncodingMatrix,
    x: &FieldVector,
    client: usize,
) -> Result<FieldElement, DecodeError> {
    check_len(x, encoding.problem().k(), encoding)?;
    check_client(encoding, client)?;
    let f = encoding.field();
    let m = encoding.matrix();
    let y = (0..m.rows()).fold(0, |acc, i| f.add(acc, f.mul(m.get(i, client), x.values()[i])));
    Ok(f.element(y as u64)?)
}

/// All honest broadcasts `Y = X E`.
pub fn broadcast_all(encoding: &EncodingMatrix, x: &FieldVector) -> Result<FieldVector, DecodeError> {
    check_len(x, encoding.problem().k(), encoding)?;
    Ok(FieldVector::new(encoding.field(), encoding.matrix().left_mul(x.values()))?)
}

/// Strips the contribution of `client`'s held packets from every broadcast.
/// The client's own coordinate is zeroed: it knows what it sent.
pub fn reduce_received(
    encoding: &EncodingMatrix,
    client: usize,
    y: &FieldVector,
    held: &HeldPackets,
) -> Result<FieldVector, DecodeError> {
    let problem = encoding.problem();
    check_client(encoding, client)?;
    check_len(y, problem.n(), encoding)?;
    if !held.keys().copied().eq(problem.holdings(client).iter().copied()) {
        return Err(DecodeError::HeldMismatch { client });
    }
    let f = encoding.field();
    let m = encoding.matrix();
    let mut z = y.values().to_vec();
    for (&i, &v) in held {
        if v.field() != f {
            return Err(FieldError::FieldMismatch(f.modulus(), v.field().modulus()).into());
        }
        for (c, zc) in z.iter_mut().enumerate() {
            *zc = f.sub(*zc, f.mul(m.get(i, c), v.value()));
        }
    }
    z[client] = 0;
    Ok(FieldVector::new(f, z)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeStatus {
    Unique,
    /// Several messages tie at the minimum distance; the lexicographically
    /// first is returned.
    Ambiguous { minimizers: u64 },
}

/// Output of the brute-force decoder on one local code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecode {
    /// Estimated values of the missing packets, in `LocalCode::missing` order.
    pub message: FieldVector,
    pub distance: usize,
    pub status: DecodeStatus,
}

/// Returns the message whose codeword is Hamming-closest to `z`, visiting all
/// `q^|missing|` candidates.
pub fn min_distance_decode(code: &LocalCode, z: &FieldVector, budget: u64) -> Result<LocalDecode, DecodeError> {
    let g = code.generator();
    let f = g.field();
    if z.field() != f {
        return Err(FieldError::FieldMismatch(f.modulus(), z.field().modulus()).into());
    }
    if z.len() != code.length() {
        return Err(DecodeError::Length {
            expected: code.length(),
            actual: z.len(),
        });
    }
    let m = code.dimension();
    let q = f.modulus();
    let required = (q as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(DecodeError::BudgetExceeded { required, budget });
    }
    let target = z.values();
    let mut digits = vec![0u32; m];
    // Residual r = z - codeword, updated incrementally; distance = wt(r).
    let mut residual = target.to_vec();
    let mut best = usize::MAX;
    let mut best_msg = digits.clone();
    let mut ties = 0u64;
    loop {
        let d = residual.iter().filter(|&&v| v != 0).count();
        if d < best {
            best = d;
            best_msg.copy_from_slice(&digits);
            ties = 1;
        } else if d == best {
            ties += 1;
        }
        // Lexicographic odometer, last digit fastest.
        let mut pos = m;
        let done = loop {
            if pos == 0 {
                break true;
            }
            pos -= 1;
            for (r, &a) in residual.iter_mut().zip(g.row(pos)) {
                *r = f.sub(*r, a);
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break false;
            }
            digits[pos] = 0;
        };
        if done {
            break;
        }
    }
    Ok(LocalDecode {
        message: FieldVector::new(f, best_msg)?,
        distance: best,
        status: if ties == 1 {
            DecodeStatus::Unique
        } else {
            DecodeStatus::Ambiguous { minimizers: ties }
        },
    })
}

/// A client's full reconstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub client: usize,
    /// Decoded values of the missing packets.
    pub recovered: BTreeMap<usize, FieldElement>,
    /// Held packets merged with the decoded ones.
    pub estimate: FieldVector,
    pub status: DecodeStatus,
    pub distance: usize,
}

pub fn decode_all(
    encoding: &EncodingMatrix,
    client: usize,
    y: &FieldVector,
    held: &HeldPackets,
    budget: u64,
) -> Result<DecodeResult, DecodeError> {
    let z = reduce_received(encoding, client, y, held)?;
    let code = encoding.local_receiving_matrix(client);
    let local = min_distance_decode(&code, &z, budget)?;
    let f = encoding.field();
    let mut estimate = FieldVector::zeros(f, encoding.problem().k());
    for (&i, &v) in held {
        estimate.set(i, v)?;
    }
    let mut recovered = BTreeMap::new();
    for (t, &i) in code.missing().iter().enumerate() {
        let v = local.message.get(t);
        estimate.set(i, v)?;
        recovered.insert(i, v);
    }
    Ok(DecodeResult {
        client,
        recovered,
        estimate,
        status: local.status,
        distance: local.distance,
    })
}
