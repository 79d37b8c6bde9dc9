//! Verifiable secret sharing with symmetric bivariate polynomials over GF(p).
//!
//! Each message chunk `s` is the constant term of a symmetric bivariate
//! polynomial F of degree ≤ t in each variable. Party i receives
//! `f_i(x) = F(x, i)` and, from every other party j, the cross value
//! `f_j(i)`; a mismatch raises a complaint flag against j. Reconstruction
//! Reed–Solomon decodes the diagonal values `f_i(0) = F(0, i)`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{param, protocol, Error, Result};
use crate::field::Field;
use crate::wire::{Decode, Encode, Reader, Writer};

pub const DEFAULT_MODULUS: u32 = 257;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VssParams {
    pub n: usize,
    pub t: usize,
    pub field: Field,
}

impl VssParams {
    pub fn new(n: usize, t: usize, p: u32) -> Result<Self> {
        let field = Field::new(p)?;
        if n == 0 || n > u16::MAX as usize {
            return param(format!("party count {n} out of range"));
        }
        if 3 * t > n {
            return param(format!("t = {t} exceeds n/3 for n = {n}"));
        }
        // Evaluation points are 1..=n, so p > n is what the scheme needs.
        if p as usize <= n {
            return param(format!("modulus {p} must exceed n = {n}"));
        }
        Ok(VssParams { n, t, field })
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Bits per field-element chunk: floor(log2 p).
    pub fn chunk_bits(&self) -> usize {
        31 - self.p().leading_zeros() as usize
    }

    pub fn chunks_for(&self, message_bits: usize) -> usize {
        message_bits.div_ceil(self.chunk_bits())
    }

    /// Encoded size of a view with `chunks` chunks.
    pub fn view_len(&self, chunks: usize) -> usize {
        10 + 2 * chunks * (self.t + 1) + 2 * (self.n - 1) * chunks + (self.n - 1) + self.n
    }
}

/// Splits a message into chunks of `bits` bits, zero-padding the last one.
pub fn message_to_chunks(message: &Bits, bits: usize) -> Vec<u32> {
    let chunks = message.len().div_ceil(bits);
    (0..chunks)
        .map(|c| {
            let start = c * bits;
            let avail = bits.min(message.len() - start);
            (message.read_uint(start, avail) << (bits - avail)) as u32
        })
        .collect()
}

/// Inverse of [`message_to_chunks`]; `None` if a chunk is out of range or
/// the padding is nonzero.
pub fn chunks_to_message(chunks: &[u32], bits: usize, len: usize) -> Option<Bits> {
    if chunks.len() != len.div_ceil(bits) {
        return None;
    }
    let mut out = Bits::zeros(0);
    for &c in chunks {
        if c as u64 >= 1u64 << bits {
            return None;
        }
        out.extend(&Bits::from_u64(c as u64, bits));
    }
    if out.iter().skip(len).any(|b| b) {
        return None;
    }
    Some(out.slice(0, len))
}

/// One shareholder's record of the sharing phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VssView {
    /// 1-based.
    pub party: usize,
    pub n: usize,
    pub t: usize,
    pub p: u32,
    /// Per chunk, t+1 coefficients of f_i, low degree first.
    pub share_polys: Vec<Vec<u32>>,
    /// For each j ≠ i ascending, the values f_j(i) received from j, per chunk.
    pub cross: Vec<Vec<u32>>,
    /// For each j ≠ i ascending, whether i complains about j.
    pub flags: Vec<bool>,
    /// Broadcast round: for every party 1..=n, whether it complained at all.
    pub complainers: Vec<bool>,
}

impl VssView {
    pub fn chunks(&self) -> usize {
        self.share_polys.len()
    }

    /// Position of party j among the other parties of this view.
    pub fn slot_of(&self, j: usize) -> usize {
        debug_assert!(j != self.party && (1..=self.n).contains(&j));
        if j < self.party {
            j - 1
        } else {
            j - 2
        }
    }

    pub fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(move |&j| j != self.party)
    }

    pub fn cross_from(&self, j: usize) -> &[u32] {
        &self.cross[self.slot_of(j)]
    }

    pub fn complains_about(&self, j: usize) -> bool {
        self.flags[self.slot_of(j)]
    }

    pub fn complaint_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// More than t parties complained in the broadcast round. Every honest
    /// view of one sharing agrees on this.
    pub fn disqualifies_dealer(&self) -> bool {
        self.complainers.iter().filter(|&&c| c).count() > self.t
    }

    fn field(&self) -> Option<Field> {
        Field::new(self.p).ok()
    }

    /// f_i(x) for one chunk.
    pub fn eval(&self, chunk: usize, x: u32) -> u32 {
        let f = Field::new(self.p).expect("view modulus validated");
        f.eval(&self.share_polys[chunk], x)
    }

    /// The diagonal value f_i(0) per chunk.
    pub fn diagonal(&self) -> Vec<u32> {
        self.share_polys.iter().map(|poly| poly[0]).collect()
    }

    /// Structure, ranges, and flags that agree with the view's own data.
    pub fn well_formed(&self) -> bool {
        let Some(field) = self.field() else { return false };
        let n = self.n;
        if self.party == 0 || self.party > n || 3 * self.t > n || self.p as usize <= n {
            return false;
        }
        let chunks = self.chunks();
        let in_range = |v: &u32| *v < self.p;
        if self.share_polys.iter().any(|poly| poly.len() != self.t + 1 || !poly.iter().all(in_range)) {
            return false;
        }
        if self.cross.len() != n - 1 || self.flags.len() != n - 1 || self.complainers.len() != n {
            return false;
        }
        if self.complainers[self.party - 1] != (self.complaint_count() > 0) {
            return false;
        }
        if self.cross.iter().any(|row| row.len() != chunks || !row.iter().all(in_range)) {
            return false;
        }
        self.others().all(|j| {
            let slot = self.slot_of(j);
            let mismatch = (0..chunks).any(|c| field.eval(&self.share_polys[c], j as u32) != self.cross[slot][c]);
            mismatch == self.flags[slot]
        })
    }

    pub fn same_setup(&self, other: &VssView) -> bool {
        self.n == other.n && self.t == other.t && self.p == other.p && self.chunks() == other.chunks()
    }
}

impl Encode for VssView {
    fn encode_into(&self, w: &mut Writer) {
        w.u16(self.party as u16).u16(self.n as u16).u16(self.t as u16).u16(self.p as u16).u16(self.chunks() as u16);
        for poly in &self.share_polys {
            for &c in poly {
                w.u16(c as u16);
            }
        }
        for row in &self.cross {
            for &v in row {
                w.u16(v as u16);
            }
        }
        for &f in self.flags.iter().chain(&self.complainers) {
            w.u8(f as u8);
        }
    }
}

impl Decode for VssView {
    /// Strict: rejects anything that is not the canonical encoding of a
    /// well-formed view.
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let party = r.u16()? as usize;
        let n = r.u16()? as usize;
        let t = r.u16()? as usize;
        let p = r.u16()? as u32;
        let chunks = r.u16()? as usize;
        if n == 0 || party == 0 || party > n || 3 * t > n {
            return protocol("view header out of range");
        }
        let mut read_elems = |count: usize| -> Result<Vec<u32>> { (0..count).map(|_| r.u16().map(u32::from)).collect() };
        let coeffs = read_elems(chunks * (t + 1))?;
        let cross = read_elems((n - 1) * chunks)?;
        let flag_bytes = r.take(2 * n - 1)?;
        if flag_bytes.iter().any(|&b| b > 1) {
            return protocol("flag byte is not 0 or 1");
        }
        let view = VssView {
            party,
            n,
            t,
            p,
            share_polys: coeffs.chunks(t + 1).map(<[u32]>::to_vec).collect(),
            cross: if chunks == 0 { vec![Vec::new(); n - 1] } else { cross.chunks(chunks).map(<[u32]>::to_vec).collect() },
            flags: flag_bytes[..n - 1].iter().map(|&b| b == 1).collect(),
            complainers: flag_bytes[n - 1..].iter().map(|&b| b == 1).collect(),
        };
        if !view.well_formed() {
            return protocol("view is not well formed");
        }
        Ok(view)
    }
}

/// Dealer's randomness: per chunk a symmetric (t+1)×(t+1) coefficient matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerView {
    pub params: VssParams,
    pub message_bits: usize,
    pub bivariate: Vec<Vec<Vec<u32>>>,
}

/// Coefficients of F(x, y0) in x, for F given by a coefficient matrix.
pub fn restrict(field: &Field, coeffs: &[Vec<u32>], y0: u32) -> Vec<u32> {
    coeffs.iter().map(|row| field.eval(row, y0)).collect()
}

/// Builds views from the polynomials handed to each party (possibly by a
/// cheating dealer). Shareholders behave honestly: each sends f_j(i) to i and
/// flags mismatches.
pub fn views_from_polys(params: &VssParams, polys: &[Vec<Vec<u32>>]) -> Result<Vec<VssView>> {
    let (n, t, f) = (params.n, params.t, params.field);
    if polys.len() != n {
        return param(format!("need polynomials for {n} parties"));
    }
    let chunks = polys[0].len();
    if polys.iter().any(|pp| pp.len() != chunks || pp.iter().any(|poly| poly.len() != t + 1 || poly.iter().any(|&c| c >= f.p()))) {
        return param("polynomial shape does not match parameters");
    }
    let mut views: Vec<VssView> = (1..=n)
        .map(|i| {
            let mut cross = Vec::with_capacity(n - 1);
            let mut flags = Vec::with_capacity(n - 1);
            for j in (1..=n).filter(|&j| j != i) {
                let recv: Vec<u32> = (0..chunks).map(|c| f.eval(&polys[j - 1][c], i as u32)).collect();
                let mismatch = (0..chunks).any(|c| f.eval(&polys[i - 1][c], j as u32) != recv[c]);
                cross.push(recv);
                flags.push(mismatch);
            }
            VssView { party: i, n, t, p: f.p(), share_polys: polys[i - 1].clone(), cross, flags, complainers: Vec::new() }
        })
        .collect();
    let complainers: Vec<bool> = views.iter().map(|v| v.complaint_count() > 0).collect();
    for v in &mut views {
        v.complainers = complainers.clone();
    }
    Ok(views)
}

/// Shares `message` among n parties.
pub fn vss_share<R: RngCore + ?Sized>(message: &Bits, params: &VssParams, rng: &mut R) -> Result<(Vec<VssView>, DealerView)> {
    let (t, f) = (params.t, params.field);
    let secrets = message_to_chunks(message, params.chunk_bits());
    let bivariate: Vec<Vec<Vec<u32>>> = secrets
        .iter()
        .map(|&s| {
            let mut a = vec![vec![0u32; t + 1]; t + 1];
            for u in 0..=t {
                for v in u..=t {
                    let c = if u == 0 && v == 0 { s } else { rng.gen_range(0..f.p()) };
                    a[u][v] = c;
                    a[v][u] = c;
                }
            }
            a
        })
        .collect();
    let dealer = DealerView { params: *params, message_bits: message.len(), bivariate };
    let views = views_from_dealer(&dealer)?;
    Ok((views, dealer))
}

pub fn views_from_dealer(dealer: &DealerView) -> Result<Vec<VssView>> {
    let p = &dealer.params;
    let polys: Vec<Vec<Vec<u32>>> =
        (1..=p.n).map(|i| dealer.bivariate.iter().map(|a| restrict(&p.field, a, i as u32)).collect()).collect();
    views_from_polys(p, &polys)
}

/// Reconstruction input: one slot per party, `None` for a missing view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconInput {
    pub params: VssParams,
    pub message_bits: usize,
    pub views: Vec<Option<VssView>>,
}

impl ReconInput {
    /// Decodes byte-string slots; anything that fails to decode is erased.
    pub fn from_bytes(params: VssParams, message_bits: usize, slots: &[Option<Vec<u8>>]) -> Self {
        let views = slots.iter().map(|s| s.as_ref().and_then(|b| VssView::decode(b).ok())).collect();
        ReconInput { params, message_bits, views }
    }
}

/// Reconstructed chunk values before range checks, or `None` on failure.
///
/// Slots that are missing, malformed, misplaced, or belong to a different
/// setup are erasures. More than t complaining views disqualify the dealer.
/// A view enters decoding only
/// if it is pairwise consistent with at least n - t - 1 other views, which
/// pins its diagonal value when n ≥ 3t + 1. Fewer than n - t such views is a
/// failure: the survivors could not outvote a coordinated minority.
pub fn vss_recon_chunks(input: &ReconInput) -> Option<Vec<u32>> {
    let params = &input.params;
    let chunks = params.chunks_for(input.message_bits);
    if input.views.len() != params.n {
        return None;
    }
    let usable = |slot: usize, v: &VssView| {
        v.party == slot + 1 && v.n == params.n && v.t == params.t && v.p == params.p() && v.chunks() == chunks && v.well_formed()
    };
    let present: Vec<&VssView> =
        input.views.iter().enumerate().filter_map(|(s, v)| v.as_ref().filter(|v| usable(s, v))).collect();
    let complaining = present.iter().filter(|v| v.complaint_count() > 0).count();
    if complaining > params.t {
        return None;
    }
    let mut support = vec![0usize; present.len()];
    for a in 0..present.len() {
        for b in a + 1..present.len() {
            if pair_consistent(&params.field, present[a], present[b]) {
                support[a] += 1;
                support[b] += 1;
            }
        }
    }
    let need = params.n - params.t - 1;
    let good: Vec<&VssView> = present
        .iter()
        .zip(&support)
        .filter(|(_, &s)| s >= need)
        .map(|(v, _)| *v)
        .collect();
    if good.len() < params.n - params.t {
        return None;
    }
    (0..chunks)
        .map(|c| {
            let pts: Vec<(u32, u32)> = good.iter().map(|v| (v.party as u32, v.share_polys[c][0])).collect();
            params.field.rs_decode(&pts, params.t).map(|poly| poly[0])
        })
        .collect()
}

/// Consistency of two well-formed views with the same setup.
fn pair_consistent(field: &Field, a: &VssView, b: &VssView) -> bool {
    let (i, j) = (a.party, b.party);
    let (sa, sb) = (a.slot_of(j), b.slot_of(i));
    a.complainers == b.complainers
        && (0..a.chunks()).all(|c| {
        let aj = field.eval(&a.share_polys[c], j as u32);
        let bi = field.eval(&b.share_polys[c], i as u32);
        aj == bi && a.cross[sa][c] == bi && b.cross[sb][c] == aj
    })
}

pub fn vss_recon(input: &ReconInput) -> Option<Bits> {
    let chunks = vss_recon_chunks(input)?;
    chunks_to_message(&chunks, input.params.chunk_bits(), input.message_bits)
}

/// Pairwise consistency of two views of one sharing.
pub fn vss_view_consistent(a: &VssView, b: &VssView) -> Result<bool> {
    if a.party == b.party {
        return Err(Error::Param(format!("consistency of party {} with itself", a.party)));
    }
    if !a.well_formed() || !b.well_formed() || !a.same_setup(b) {
        return Ok(false);
    }
    let field = Field::new(a.p)?;
    Ok(pair_consistent(&field, a, b))
}

/// [`vss_view_consistent`] on encodings; undecodable input is inconsistent.
pub fn vss_bytes_consistent(a: &[u8], b: &[u8]) -> bool {
    match (VssView::decode(a), VssView::decode(b)) {
        (Ok(va), Ok(vb)) => vss_view_consistent(&va, &vb).unwrap_or(false),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn parameter_checks() {
        assert!(VssParams::new(4, 2, 257).is_err());
        assert!(VssParams::new(10, 3, 7).is_err());
        assert!(VssParams::new(4, 1, 6).is_err());
        assert!(VssParams::new(4, 1, 3).is_err());
        assert!(VssParams::new(3, 1, 5).is_ok());
        assert_eq!(VssParams::new(10, 3, 257).unwrap().chunk_bits(), 8);
    }

    #[test]
    fn fixed_bivariate_example() {
        // p = 7, F(x, y) = 3 + 2x + 2y + 5xy. f_1(x) = F(x, 1) = 5 + 7x = 5.
        let params = VssParams::new(4, 1, 7).unwrap();
        let dealer = DealerView { params, message_bits: 2, bivariate: vec![vec![vec![3, 2], vec![2, 5]]] };
        let views = views_from_dealer(&dealer).unwrap();
        assert_eq!(views[0].share_polys[0], vec![5, 0]);
        assert_eq!(views[0].diagonal(), vec![5]);
        let input = ReconInput { params, message_bits: 2, views: views.into_iter().map(Some).collect() };
        assert_eq!(vss_recon_chunks(&input), Some(vec![3]));
        assert_eq!(vss_recon(&input), Some(Bits::parse("11").unwrap()));
    }

    #[test]
    fn zero_message_zero_randomness() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let dealer = DealerView { params, message_bits: 16, bivariate: vec![vec![vec![0; 2]; 2]; 2] };
        let views = views_from_dealer(&dealer).unwrap();
        assert!(views.iter().all(|v| v.share_polys.iter().flatten().all(|&c| c == 0)));
    }

    #[test]
    fn honest_views_pairwise_consistent() {
        let params = VssParams::new(3, 1, 257).unwrap();
        let (views, _) = vss_share(&Bits::parse("1011001110").unwrap(), &params, &mut rng(1)).unwrap();
        for a in &views {
            assert_eq!(a.complaint_count(), 0);
            for b in &views {
                if a.party != b.party {
                    assert!(vss_view_consistent(a, b).unwrap());
                }
            }
        }
        assert!(vss_view_consistent(&views[0], &views[0]).is_err());
    }

    #[test]
    fn tampered_coefficient_breaks_consistency() {
        let params = VssParams::new(7, 2, 257).unwrap();
        let (mut views, _) = vss_share(&Bits::random(24, &mut rng(2)), &params, &mut rng(3)).unwrap();
        views[2].share_polys[1][1] = (views[2].share_polys[1][1] + 1) % 257;
        let f = params.field;
        for j in 1..=7usize {
            if j == 3 {
                continue;
            }
            // Oracle: the tampered view is consistent with j iff both cross points still agree.
            let expect = (0..3).all(|c| f.eval(&views[2].share_polys[c], j as u32) == views[j - 1].eval(c, 3));
            // The tampered view's flags are now stale, so it is not well formed either.
            assert!(!vss_view_consistent(&views[2], &views[j - 1]).unwrap());
            assert!(!expect);
        }
    }

    #[test]
    fn undecodable_view_is_inconsistent() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let (views, _) = vss_share(&Bits::random(8, &mut rng(4)), &params, &mut rng(5)).unwrap();
        let good = views[0].encode();
        assert!(vss_bytes_consistent(&good, &views[1].encode()));
        assert!(!vss_bytes_consistent(&good[..good.len() - 1], &views[1].encode()));
        assert!(!vss_bytes_consistent(&[], &views[1].encode()));
    }

    #[test]
    fn encoding_layout_and_round_trip() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let (views, _) = vss_share(&Bits::random(20, &mut rng(6)), &params, &mut rng(7)).unwrap();
        let enc = views[1].encode();
        assert_eq!(enc.len(), params.view_len(3));
        assert_eq!(&enc[..10], &[0, 2, 0, 4, 0, 1, 1, 1, 0, 3]);
        assert_eq!(VssView::decode(&enc).unwrap(), views[1]);
        // Party 2 claiming a complaint in the broadcast without flagging anyone.
        let mut bad = enc.clone();
        let own = bad.len() - 4 + 1;
        bad[own] = 1;
        assert!(VssView::decode(&bad).is_err());
        bad[own] = 2;
        assert!(VssView::decode(&bad).is_err());
    }

    #[test]
    fn recon_tolerates_t_garbage_views() {
        let params = VssParams::new(7, 2, 257).unwrap();
        let mut g = rng(8);
        for _ in 0..50 {
            let m = Bits::random(30, &mut g);
            let (views, _) = vss_share(&m, &params, &mut g).unwrap();
            let mut slots: Vec<Option<VssView>> = views.into_iter().map(Some).collect();
            // Garbage: a fresh sharing of a random message at the same slots.
            let (other, _) = vss_share(&Bits::random(30, &mut g), &params, &mut g).unwrap();
            slots[1] = Some(other[1].clone());
            slots[5] = Some(other[5].clone());
            let input = ReconInput { params, message_bits: 30, views: slots };
            assert_eq!(vss_recon(&input), Some(m));
        }
    }

    #[test]
    fn recon_with_erasures_and_all_missing() {
        let params = VssParams::new(10, 3, 257).unwrap();
        let m = Bits::random(32, &mut rng(9));
        let (views, _) = vss_share(&m, &params, &mut rng(10)).unwrap();
        let mut slots: Vec<Option<VssView>> = views.into_iter().map(Some).collect();
        for s in [0, 4, 9] {
            slots[s] = None;
        }
        let input = ReconInput { params, message_bits: 32, views: slots };
        assert_eq!(vss_recon(&input), Some(m));
        let empty = ReconInput { params, message_bits: 32, views: vec![None; 10] };
        assert_eq!(vss_recon(&empty), None);
    }

    #[test]
    fn t_plus_one_adversarial_views_give_original_or_bottom() {
        // n = 4, t = 1: two views replaced by views of another degree-1 sharing.
        let params = VssParams::new(4, 1, 257).unwrap();
        let mut g = rng(11);
        let mut outcomes: HashMap<&str, usize> = HashMap::new();
        for _ in 0..200 {
            let m = Bits::random(8, &mut g);
            let (views, _) = vss_share(&m, &params, &mut g).unwrap();
            let (alt, _) = vss_share(&Bits::random(8, &mut g), &params, &mut g).unwrap();
            let a = g.gen_range(0..4);
            let b = (a + g.gen_range(1..4)) % 4;
            let mut slots: Vec<Option<VssView>> = views.into_iter().map(Some).collect();
            slots[a] = Some(alt[a].clone());
            slots[b] = Some(alt[b].clone());
            let out = vss_recon(&ReconInput { params, message_bits: 8, views: slots });
            match out {
                None => *outcomes.entry("bottom").or_default() += 1,
                Some(v) if v == m => *outcomes.entry("original").or_default() += 1,
                Some(v) => panic!("third value reconstructed: {m:?} {v:?} a={a} b={b} alt={:?}", alt.iter().map(|x| x.diagonal()).collect::<Vec<_>>()),
            }
        }
        assert!(outcomes.values().sum::<usize>() == 200);
    }

    #[test]
    fn secrecy_exact_single_view() {
        // p = 5, n = 4, t = 1: enumerate the dealer's two free coefficients.
        let params = VssParams::new(4, 1, 5).unwrap();
        let law = |secret: u32, party: usize| {
            let mut h: HashMap<Vec<u8>, u32> = HashMap::new();
            for a01 in 0..5 {
                for a11 in 0..5 {
                    let dealer = DealerView { params, message_bits: 2, bivariate: vec![vec![vec![secret, a01], vec![a01, a11]]] };
                    let views = views_from_dealer(&dealer).unwrap();
                    *h.entry(views[party].encode()).or_default() += 1;
                }
            }
            h
        };
        for party in 0..4 {
            let base = law(0, party);
            for s in 1..4 {
                assert_eq!(law(s, party), base);
            }
        }
    }

    #[test]
    fn verifiable_committing_exhaustive() {
        // p = 5, n = 4, t = 1, one chunk: every assignment of degree-1
        // polynomials to the four parties. Either every view marks the
        // dealer disqualified or reconstruction yields a field value.
        let params = VssParams::new(4, 1, 5).unwrap();
        let mut disqualified = 0;
        for code in 0..5u32.pow(8) {
            let mut c = code;
            let polys: Vec<Vec<Vec<u32>>> = (0..4)
                .map(|_| {
                    let a = c % 5;
                    let b = (c / 5) % 5;
                    c /= 25;
                    vec![vec![a, b]]
                })
                .collect();
            let views = views_from_polys(&params, &polys).unwrap();
            if views.iter().all(VssView::disqualifies_dealer) {
                disqualified += 1;
                continue;
            }
            let input = ReconInput { params, message_bits: 2, views: views.iter().cloned().map(Some).collect() };
            let value = vss_recon_chunks(&input);
            assert!(value.is_some(), "recon failed for {polys:?}");
        }
        assert!(disqualified > 0);
    }

    #[test]
    fn chunking_round_trip() {
        let m = Bits::parse("1011001").unwrap();
        let c = message_to_chunks(&m, 3);
        assert_eq!(c, vec![0b101, 0b100, 0b100]);
        assert_eq!(chunks_to_message(&c, 3, 7), Some(m));
        assert_eq!(chunks_to_message(&[0b101, 0b100, 0b101], 3, 7), None);
        assert_eq!(chunks_to_message(&[8, 0, 0], 3, 7), None);
    }
}
