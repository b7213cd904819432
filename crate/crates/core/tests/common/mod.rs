#![allow(dead_code)]

use thinsieve::cf::{word_to_matrix, Word};
use thinsieve::semigroup::SemigroupElement;

/// Every word of length exactly `len` over `[1, alphabet]`, lexicographic.
pub fn words_of_length(alphabet: u64, len: usize) -> Vec<Word> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|v| (1..=alphabet).map(move |x| [v.as_slice(), &[x]].concat()))
            .collect();
    }
    out.into_iter().map(|v| Word::new(v).unwrap()).collect()
}

pub fn word(d: &[u64]) -> Word {
    Word::new(d.to_vec()).unwrap()
}

/// Breadth-first ball with no pruning: every word up to a length where even the
/// all-ones word has left the ball, filtered by norm afterwards.
pub fn bfs_ball(alphabet: u64, n: f64, even_only: bool) -> Vec<SemigroupElement> {
    let max_sq = (n * n).floor() as i128;
    let mut out = Vec::new();
    let mut len = 1;
    loop {
        // the all-ones word has the smallest norm at each length
        let ones = word_to_matrix(&Word::new(vec![1; len]).unwrap()).unwrap();
        if ones.norm_sq() > max_sq {
            break;
        }
        if !even_only || len % 2 == 0 {
            for w in words_of_length(alphabet, len) {
                let m = word_to_matrix(&w).unwrap();
                if m.norm_sq() <= max_sq {
                    out.push(SemigroupElement { word: w, matrix: m });
                }
            }
        }
        len += 1;
    }
    out
}
