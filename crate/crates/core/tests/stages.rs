use std::collections::VecDeque;

use textseg::binarize::{kmeans2, KMeansParams};
use textseg::corpus::{render_text, LOOP_GLYPHS};
use textseg::morphology::{is_fully_connected, label_components, skeletonize, text_candidates};
use textseg::raster::{BinaryMask, GrayImage, Point};

/// Plain Zhang-Suen over a `Vec<Vec<u8>>` copy, one full copy per
/// subiteration.
fn oracle_thin(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut g = vec![vec![0u8; w + 2]; h + 2];
    for p in mask.foreground() {
        g[p.y + 1][p.x + 1] = 1;
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let snapshot = g.clone();
            for y in 1..=h {
                for x in 1..=w {
                    if snapshot[y][x] == 0 {
                        continue;
                    }
                    let p = [
                        snapshot[y - 1][x],
                        snapshot[y - 1][x + 1],
                        snapshot[y][x + 1],
                        snapshot[y + 1][x + 1],
                        snapshot[y + 1][x],
                        snapshot[y + 1][x - 1],
                        snapshot[y][x - 1],
                        snapshot[y - 1][x - 1],
                    ];
                    let b: u8 = p.iter().sum();
                    let a = (0..8).filter(|&i| p[i] == 0 && p[(i + 1) % 8] == 1).count();
                    let cond = if step == 0 {
                        p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0
                    } else {
                        p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && cond {
                        g[y][x] = 0;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, g[y + 1][x + 1] == 1);
        }
    }
    out
}

/// Background pixels of the padded bbox unreachable from the padding.
fn oracle_enclosed(pixels: &[Point]) -> usize {
    let x0 = pixels.iter().map(|p| p.x).min().unwrap();
    let y0 = pixels.iter().map(|p| p.y).min().unwrap();
    let x1 = pixels.iter().map(|p| p.x).max().unwrap();
    let y1 = pixels.iter().map(|p| p.y).max().unwrap();
    let (gw, gh) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut fg = vec![false; gw * gh];
    for p in pixels {
        fg[(p.y - y0 + 1) * gw + p.x - x0 + 1] = true;
    }
    let mut seen = vec![false; gw * gh];
    let mut q = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = q.pop_front() {
        let (x, y) = ((i % gw) as i64, (i / gw) as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= gw as i64 || ny >= gh as i64 {
                continue;
            }
            let j = ny as usize * gw + nx as usize;
            if !fg[j] && !seen[j] {
                seen[j] = true;
                q.push_back(j);
            }
        }
    }
    (0..gw * gh).filter(|&i| !fg[i] && !seen[i]).count()
}

fn text_mask(text: &str, scale: usize) -> BinaryMask {
    let pts = render_text(text, scale).unwrap();
    let w = pts.iter().map(|p| p.0).max().unwrap() + 5;
    let h = pts.iter().map(|p| p.1).max().unwrap() + 5;
    let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x + 2, y + 2)).collect();
    BinaryMask::from_points(w, h, &pts)
}

#[test]
fn rectangle_skeleton_matches_oracle() {
    let m = BinaryMask::from_art(&["#######", "#######", "#######"]).unwrap();
    let s = skeletonize(&m);
    assert_eq!(s, oracle_thin(&m));
    // one pixel thick on the middle row; the south-east subiteration takes
    // one more column off the east end than the west
    let pts: Vec<Point> = s.foreground().collect();
    assert!(pts.iter().all(|p| p.y == 1), "{:?}", s.to_art());
    let xs: Vec<usize> = pts.iter().map(|p| p.x).collect();
    assert_eq!(xs, vec![1, 2, 3, 4]);
}

#[test]
fn thinning_matches_oracle_on_glyphs() {
    for c in ('A'..='Z').chain('0'..='9') {
        for scale in 1..=4 {
            let m = text_mask(&c.to_string(), scale);
            assert_eq!(skeletonize(&m), oracle_thin(&m), "{c} x{scale}");
        }
    }
}

#[test]
fn disc_skeleton_has_no_hole() {
    let r = 6i64;
    let n = 2 * r as usize + 5;
    let c = n as i64 / 2;
    let mut m = BinaryMask::new(n, n);
    for y in 0..n as i64 {
        for x in 0..n as i64 {
            if (x - c).pow(2) + (y - c).pow(2) <= r * r {
                m.set(x as usize, y as usize, true);
            }
        }
    }
    let s = skeletonize(&m);
    let comps = label_components(&s);
    assert_eq!(comps.len(), 1);
    assert_eq!(oracle_enclosed(&comps[0].pixels), 0);
    assert!(!is_fully_connected(&comps[0]));
}

#[test]
fn glyph_o_is_a_candidate_i_is_not() {
    let set = text_candidates(&text_mask("O", 3));
    assert_eq!(set.candidates.len(), 1);
    assert!(set.rejected.is_empty());

    let set = text_candidates(&text_mask("IO", 3));
    assert_eq!(set.candidates.len(), 1);
    assert_eq!(set.rejected.len(), 1);
    // "I" sits left of "O"
    assert!(set.rejected[0].bbox.x < set.candidates[0].bbox.x);
}

#[test]
fn thinning_preserves_component_count_on_glyphs() {
    for c in ('A'..='Z').chain('0'..='9') {
        for scale in 1..=4 {
            let m = text_mask(&c.to_string(), scale);
            let before = label_components(&m).len();
            let after = label_components(&skeletonize(&m)).len();
            assert_eq!(before, after, "{c} x{scale}");
        }
    }
}

#[test]
fn candidate_split_agrees_with_flood_oracle() {
    for c in ('A'..='Z').chain('0'..='9') {
        for scale in 1..=4 {
            let set = text_candidates(&text_mask(&c.to_string(), scale));
            for k in &set.candidates {
                assert!(oracle_enclosed(&k.pixels) > 0, "{c} x{scale}");
            }
            for k in &set.rejected {
                assert!(k.len() < 4 || oracle_enclosed(&k.pixels) == 0, "{c} x{scale}");
            }
            assert_eq!(!set.candidates.is_empty(), LOOP_GLYPHS.contains(&c), "{c} x{scale}");
        }
    }
}

#[test]
fn checkerboard_adjacency_by_enumeration() {
    let m = BinaryMask::from_art(&["#.#.", ".#.#", "#.#.", ".#.#"]).unwrap();
    let fg: Vec<Point> = m.foreground().collect();
    // union-find over every 8-adjacent pair
    let mut parent: Vec<usize> = (0..fg.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for i in 0..fg.len() {
        for j in 0..fg.len() {
            let (a, b) = (fg[i], fg[j]);
            if i != j && a.x.abs_diff(b.x) <= 1 && a.y.abs_diff(b.y) <= 1 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let roots: std::collections::BTreeSet<usize> = (0..fg.len()).map(|i| find(&mut parent, i)).collect();
    assert_eq!(roots.len(), 1);
    assert_eq!(label_components(&m).len(), 1);
}

#[test]
fn sharpened_trace_matrix_splits_at_87() {
    let img = GrayImage::from_rows(&[
        [87u8, 97, 58, 58],
        [87, 97, 97, 97],
        [58, 58, 58, 58],
        [43, 71, 48, 40],
    ])
    .unwrap();
    // exhaustive search over threshold partitions for the least within-cluster
    // squared error
    let vals: Vec<f64> = img.as_raw().iter().map(|&v| v as f64).collect();
    let sse = |set: &[f64]| {
        let m = set.iter().sum::<f64>() / set.len() as f64;
        set.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    };
    let best_t = (0u8..255)
        .filter(|&t| vals.iter().any(|&v| v > t as f64) && vals.iter().any(|&v| v <= t as f64))
        .min_by(|&a, &b| {
            let cost = |t: u8| {
                let hi: Vec<f64> = vals.iter().copied().filter(|&v| v > t as f64).collect();
                let lo: Vec<f64> = vals.iter().copied().filter(|&v| v <= t as f64).collect();
                sse(&hi) + sse(&lo)
            };
            cost(a).total_cmp(&cost(b))
        })
        .unwrap();
    let r = kmeans2(&img, KMeansParams::default());
    let expected: Vec<bool> = img.as_raw().iter().map(|&v| v > best_t).collect();
    assert_eq!(r.mask.as_bits(), &expected[..]);
    let text: std::collections::BTreeSet<u8> = img
        .as_raw()
        .iter()
        .zip(r.mask.as_bits())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect();
    assert_eq!(text.into_iter().collect::<Vec<_>>(), vec![87, 97]);
    assert_eq!(r.mask.count(), 6);
}
