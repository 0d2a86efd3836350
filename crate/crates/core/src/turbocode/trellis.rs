/// Feedback polynomial g0(D) = 1 + D² + D³, bit `i` is the coefficient of D^i.
pub const FEEDBACK_POLY: u8 = 0b1101;
/// Forward polynomial g1(D) = 1 + D + D³.
pub const FORWARD_POLY: u8 = 0b1011;

/// Trellis of the 8-state recursive systematic convolutional encoder
/// `[1, g1(D)/g0(D)]`.
///
/// State bits are `(d1 d2 d3)` with `d1` the most recent register value,
/// packed as `d1 << 2 | d2 << 1 | d3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    next: [[u8; 2]; Trellis::STATES],
    parity: [[u8; 2]; Trellis::STATES],
}

impl Default for Trellis {
    fn default() -> Self {
        Self::new()
    }
}

impl Trellis {
    pub const STATES: usize = 8;
    pub const MEMORY: usize = 3;

    pub fn new() -> Self {
        let mut next = [[0u8; 2]; Self::STATES];
        let mut parity = [[0u8; 2]; Self::STATES];
        for s in 0..Self::STATES as u8 {
            for u in 0..2u8 {
                let (ns, p) = Self::transition(s, u);
                next[s as usize][u as usize] = ns;
                parity[s as usize][u as usize] = p;
            }
        }
        Self { next, parity }
    }

    fn tap(poly: u8, i: usize) -> u8 {
        (poly >> i) & 1
    }

    fn transition(state: u8, u: u8) -> (u8, u8) {
        let d = [(state >> 2) & 1, (state >> 1) & 1, state & 1];
        let mut a = u;
        for i in 1..=Self::MEMORY {
            a ^= Self::tap(FEEDBACK_POLY, i) & d[i - 1];
        }
        let mut p = Self::tap(FORWARD_POLY, 0) & a;
        for i in 1..=Self::MEMORY {
            p ^= Self::tap(FORWARD_POLY, i) & d[i - 1];
        }
        ((a << 2) | (d[0] << 1) | d[1], p)
    }

    #[inline]
    pub fn next_state(&self, state: usize, u: u8) -> usize {
        self.next[state][u as usize] as usize
    }

    #[inline]
    pub fn parity(&self, state: usize, u: u8) -> u8 {
        self.parity[state][u as usize]
    }

    /// Input that drives the feedback to zero, moving one step toward state 0.
    pub fn termination_input(&self, state: usize) -> u8 {
        if self.next_state(state, 0) & 0b100 == 0 {
            0
        } else {
            1
        }
    }
}

/// Output of one constituent encoder including its three tail steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RscOutput {
    pub parity: Vec<u8>,
    pub tail_systematic: [u8; Trellis::MEMORY],
    pub tail_parity: [u8; Trellis::MEMORY],
    pub final_state: usize,
}

pub fn rsc_encode(trellis: &Trellis, bits: &[u8]) -> RscOutput {
    let mut state = 0usize;
    let mut parity = Vec::with_capacity(bits.len());
    for &u in bits {
        parity.push(trellis.parity(state, u));
        state = trellis.next_state(state, u);
    }
    let mut tail_systematic = [0u8; Trellis::MEMORY];
    let mut tail_parity = [0u8; Trellis::MEMORY];
    for t in 0..Trellis::MEMORY {
        let u = trellis.termination_input(state);
        tail_systematic[t] = u;
        tail_parity[t] = trellis.parity(state, u);
        state = trellis.next_state(state, u);
    }
    RscOutput {
        parity,
        tail_systematic,
        tail_parity,
        final_state: state,
    }
}
