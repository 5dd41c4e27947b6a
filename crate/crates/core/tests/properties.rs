use gesturetext::engine::{Engine, EngineConfig, EngineInput};
use gesturetext::geom::Point;
use gesturetext::gesture::{distance_to_words, DeviceProfile, GestureSession, TouchEvent, TouchKind};
use gesturetext::stream::BubbleTrack;
use gesturetext::text::{
    cursor_for_sentence, layout_monospace, nearest_sentence, segment_sentences, Document, LayoutConfig, Terminal,
};
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,12}"
}

/// Words with optional terminators and occasional paragraph breaks.
fn text() -> impl Strategy<Value = String> {
    prop::collection::vec((word(), prop::sample::select(vec!["", "", "", ".", "!", "?", ","]), 0u8..12), 1..60).prop_map(
        |parts| {
            let mut s = String::new();
            for (i, (w, p, brk)) in parts.iter().enumerate() {
                if i > 0 {
                    s.push_str(if *brk == 0 { "\n\n" } else { " " });
                }
                s.push_str(w);
                s.push_str(p);
            }
            s
        },
    )
}

fn brute_force(layout: &gesturetext::text::LayoutMap, p: Point) -> usize {
    layout
        .word_boxes
        .iter()
        .map(|b| (b.rect.distance_sq(p), b.sentence))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
        .1
}

proptest! {
    #[test]
    fn sentences_end_at_terminators(t in text()) {
        let spans = segment_sentences(&t);
        let chars: Vec<char> = t.chars().collect();
        let mut prev_end = 0;
        for s in &spans {
            prop_assert!(s.start >= prev_end && s.end > s.start);
            prev_end = s.end;
            match s.terminal {
                Terminal::Punctuation(c) => prop_assert_eq!(chars[s.end - 1], c),
                Terminal::LastWord => {
                    let after: String = chars[s.end..].iter().collect();
                    prop_assert!(s.end == chars.len() || after.starts_with("\n\n"));
                }
            }
        }
        // re-segmenting each sentence alone yields exactly one sentence
        for s in &spans {
            let sub: String = chars[s.start..s.end].iter().collect();
            prop_assert_eq!(segment_sentences(&sub).len(), 1);
        }
    }

    #[test]
    fn spiral_matches_brute_force(t in text(), probes in prop::collection::vec((-50.0f64..450.0, -50.0f64..900.0), 20)) {
        let doc = Document::new(t);
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        for (x, y) in probes {
            let p = Point::new(x, y);
            prop_assert_eq!(nearest_sentence(&layout, p).unwrap(), brute_force(&layout, p));
        }
    }

    #[test]
    fn layout_covers_every_word_once(t in text(), width in 80.0f64..500.0) {
        let doc = Document::new(t);
        let cfg = LayoutConfig { page_width_px: width, ..LayoutConfig::default() };
        let layout = layout_monospace(&doc, &cfg).unwrap();
        prop_assert_eq!(layout.word_boxes.len(), doc.words().len());
        for (i, a) in layout.word_boxes.iter().enumerate() {
            if !layout.overflowing.contains(&i) {
                prop_assert!(a.rect.right() <= width + 1e-9);
            }
            for b in &layout.word_boxes[i + 1..] {
                let overlap = a.rect.x < b.rect.right() && b.rect.x < a.rect.right()
                    && a.rect.y < b.rect.bottom() && b.rect.y < a.rect.bottom();
                prop_assert!(!overlap);
            }
        }
    }

    #[test]
    fn micro_moves_sum_to_one_move(steps in prop::collection::vec(-3.0f64..8.0, 1..40), ppmm in 2.0f64..12.0) {
        let profile = DeviceProfile::with_px_per_mm(ppmm);
        let mut words = 0;
        let mut residual = 0.0;
        for d in &steps {
            let (w, r) = distance_to_words(*d, &profile, residual);
            words += w;
            residual = r;
        }
        let total: f64 = steps.iter().sum();
        let exact = total / ppmm / profile.mm_per_word;
        // away from integer boundaries the accumulated floor equals the one-shot floor
        if (exact - exact.round()).abs() > 1e-6 {
            prop_assert_eq!(words, distance_to_words(total, &profile, 0.0).0);
        }
    }

    #[test]
    fn session_never_panics_and_errors_leave_it_unchanged(
        events in prop::collection::vec((0u8..3, 0u8..4, 0.0f64..360.0, 0.0f64..200.0, 0u64..300), 1..80)
    ) {
        let doc = Document::new("One two three. Four five six! Seven eight?");
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        let profile = DeviceProfile::default();
        let mut s = GestureSession::new();
        let mut t = 0;
        for (k, finger, x, y, dt) in events {
            t += dt;
            let kind = [TouchKind::Down, TouchKind::Move, TouchKind::Up][k as usize];
            let before = format!("{s:?}");
            if s.feed(&TouchEvent::new(kind, finger, x, y, t), &doc, &layout, &profile).is_err() {
                prop_assert_eq!(format!("{s:?}"), before);
            }
        }
    }
}

const TOKENS: &str = "The river rose quickly. Farmers moved their cattle uphill, \"just in time.\" Nobody was hurt!";

fn chunkings() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..8, 1..60)
}

fn fresh_track() -> (Document, BubbleTrack) {
    let doc = Document::new("Rain fell for days. The valley flooded.");
    let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
    let cursor = cursor_for_sentence(&doc, &layout, 1).unwrap();
    let track = BubbleTrack::new(&doc, cursor, 9, 1);
    (doc, track)
}

proptest! {
    #[test]
    fn rechunking_gives_identical_tracks(cuts in chunkings()) {
        let run = |sizes: &[usize]| {
            let (_, mut track) = fresh_track();
            track.set_target(12);
            let chars: Vec<char> = TOKENS.chars().collect();
            let mut i = 0;
            let mut k = 0;
            while i < chars.len() {
                let n = sizes[k % sizes.len()].min(chars.len() - i);
                let piece: String = chars[i..i + n].iter().collect();
                i += n;
                k += 1;
                track.ingest_chunk(1, &piece, i == chars.len());
            }
            track.serialize()
        };
        prop_assert_eq!(run(&cuts), run(&[chars_len()]));
    }

    #[test]
    fn conservation_under_random_ops(ops in prop::collection::vec((0u8..5, -8i64..14, 1usize..5), 1..40)) {
        let (mut doc, mut track) = fresh_track();
        let words: Vec<&str> = TOKENS.split_inclusive(' ').collect();
        let mut next = 0;
        for (op, n, m) in ops {
            match op {
                0 => { track.set_target(n); }
                1 => {
                    let piece: String = words.iter().cycle().skip(next).take(m).copied().collect();
                    next += m;
                    let id = track.pending_request.unwrap_or(1);
                    track.ingest_chunk(id, &piece, false);
                }
                2 => { track.retract(m); }
                3 => { track.commit(&mut doc).unwrap(); }
                _ => { track.revert(); }
            }
            prop_assert!(track.conservation_holds(), "{:?}", track.counters);
        }
    }
}

fn chars_len() -> usize {
    TOKENS.chars().count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn reject_restores_document(
        moves in prop::collection::vec((-60.0f64..90.0, 10u64..200), 1..20),
        chunks in prop::collection::vec(0usize..6, 0..10),
        resume in any::<bool>(),
    ) {
        let text = "Rain fell for days. The valley flooded.\n\nHelp arrived late.";
        let mut e = Engine::new(EngineConfig::default(), Document::new(text)).unwrap();
        let b = e.layout().word_boxes[3].rect;
        let (x, y) = (b.x + 1.0, b.y + 1.0);
        let mut t = 0;
        e.handle(t, &EngineInput::touch(TouchKind::Down, 1, x, y)).unwrap();
        e.handle(t + 5, &EngineInput::touch(TouchKind::Down, 2, x + 120.0, y)).unwrap();
        let mut x2 = x + 120.0;
        let words: Vec<&str> = TOKENS.split_inclusive(' ').collect();
        for (i, (dx, dt)) in moves.iter().enumerate() {
            t += dt;
            x2 += dx;
            e.handle(t, &EngineInput::touch(TouchKind::Move, 2, x2, y)).unwrap();
            if let (Some(n), Some(id)) = (chunks.get(i), e.track().and_then(|tr| tr.pending_request)) {
                let piece: String = words.iter().skip(i).take(*n).copied().collect();
                e.handle(t, &EngineInput::chunk(id, piece, false)).unwrap();
            }
        }
        e.handle(t + 1, &EngineInput::touch(TouchKind::Up, 2, x2, y)).unwrap();
        if resume {
            e.handle(t + 2, &EngineInput::touch(TouchKind::Down, 2, x2, y)).unwrap();
            e.handle(t + 3, &EngineInput::touch(TouchKind::Move, 2, x2 + 30.0, y)).unwrap();
            e.handle(t + 4, &EngineInput::touch(TouchKind::Up, 2, x2 + 30.0, y)).unwrap();
        }
        e.handle(t + 10, &EngineInput::Reject).unwrap();
        prop_assert_eq!(e.document().canonical(), Document::new(text).canonical());
        let c = e.counters();
        prop_assert_eq!(c.received, c.committed + c.discarded);
    }
}
