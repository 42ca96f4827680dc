use a2rid::cs::{cs_join_finalize, cs_join_issue, cs_join_request, cs_setup, cs_sign, cs_verify};
use a2rid::ds::{
    ds_join_finalize, ds_join_issue, ds_join_request, ds_setup, ds_sign, ds_verify, DsMode,
    DsRegistry,
};
use a2rid::primitives::dsig::dsig_keygen;
use a2rid::wire::*;
use a2rid::{BilinearContext, Bn254, CurveId, TypeA512};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn golden_telemetry() -> Telemetry {
    Telemetry {
        group_id: 0xa21d_0001,
        drone_lat: deg_to_fixed(45.4642035),
        drone_lon: deg_to_fixed(9.1899822),
        drone_alt: 12_000,
        drone_speed: 850,
        drone_cog: 27_000,
        gcs_lat: 454_640_000,
        gcs_lon: 91_890_000,
        gcs_alt: 0,
        timestamp: 1_700_000_000,
        emergency: 0,
    }
}

fn golden_field() -> SignatureField {
    SignatureField {
        mode: ModeTag::DsCpa,
        curve: CurveId::Bn254,
        fingerprint: [1, 2, 3, 4],
        body: (0..=255u8).collect(),
    }
}

fn golden_frame() -> Vec<u8> {
    let payload = encode_payload(&golden_telemetry(), &golden_field()).unwrap();
    encode_frame(&RidFrame {
        addr3: [0x02, 0, 0, 0, 0, 0x01],
        seq_ctl: 0x0010,
        addr4: [0; 6],
        payload,
    })
    .unwrap()
}

/// Bit-at-a-time CRC-16 with polynomial 0x1021 and initial value 0xffff.
fn crc16_reference(data: &[u8]) -> u16 {
    let mut crc = 0xffffu16;
    for &b in data {
        crc ^= (b as u16) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
        }
    }
    crc
}

#[test]
fn fcs_matches_reference_crc_and_golden_pin() {
    assert_eq!(fcs(b"123456789"), 0x29b1);
    let frame = golden_frame();
    let (body, tail) = frame.split_at(frame.len() - 2);
    assert_eq!(fcs(body), crc16_reference(body));
    assert_eq!(
        u16::from_be_bytes([tail[0], tail[1]]),
        crc16_reference(body)
    );
    assert_eq!(fcs(body), GOLDEN_FCS);
    assert_eq!(
        frame.len(),
        32 + 41 + 2 + golden_field().to_base58().len() + 2
    );
    assert_eq!(
        &frame[..4],
        &[
            0x08,
            0x03,
            (frame.len() - 34) as u8,
            ((frame.len() - 34) >> 8) as u8
        ]
    );
    assert_eq!(&frame[30..32], &[0xa2, 0x1d]);
}

const GOLDEN_FCS: u16 = 0xb716;

#[test]
fn golden_payload_layout() {
    let payload = encode_payload(&golden_telemetry(), &golden_field()).unwrap();
    assert_eq!(&payload[..4], &[0xa2, 0x1d, 0x00, 0x01]);
    assert_eq!(&payload[4..8], &454_642_035i32.to_be_bytes());
    assert_eq!(&payload[36..40], &1_700_000_000u32.to_be_bytes());
    assert_eq!(payload[40], 0);
    let sig_len = u16::from_be_bytes([payload[41], payload[42]]) as usize;
    assert_eq!(sig_len, payload.len() - 43);
    let raw = bs58::decode(&payload[43..]).into_vec().unwrap();
    assert_eq!(&raw[..8], &[1, 2, 2, 7, 1, 2, 3, 4]);
    assert_eq!(
        signed_message(&payload).unwrap(),
        &golden_telemetry().to_bytes()
    );
}

#[test]
fn frame_roundtrip_and_header_checks() {
    let frame = golden_frame();
    let decoded = decode_frame(&frame).unwrap();
    assert_eq!(decoded.seq_ctl, 0x0010);
    let p = decode_payload(&decoded.payload).unwrap();
    assert_eq!(p.telemetry, golden_telemetry());
    assert_eq!(p.signature, golden_field());

    let refcs = |mut f: Vec<u8>| {
        let n = f.len() - 2;
        let s = fcs(&f[..n]);
        f[n..].copy_from_slice(&s.to_be_bytes());
        f
    };
    let mut f = frame.clone();
    f[5] = 0xfe;
    assert!(matches!(decode_frame(&f), Err(WireError::Fcs { .. })));
    assert_eq!(decode_frame(&refcs(f)), Err(WireError::NotBroadcast));
    let mut f = frame.clone();
    f[31] = 0x1e;
    assert_eq!(decode_frame(&refcs(f)), Err(WireError::MessageId(0xa21e)));
    let mut f = frame.clone();
    f[2] ^= 1;
    assert!(matches!(
        decode_frame(&refcs(f)),
        Err(WireError::Duration { .. })
    ));
    let mut f = frame.clone();
    f[12] = 1;
    assert_eq!(decode_frame(&refcs(f)), Err(WireError::Sender));
    let mut f = frame;
    f[1] = 0;
    assert_eq!(
        decode_frame(&refcs(f)),
        Err(WireError::FrameControl(0x0800))
    );
}

#[test]
fn payload_decode_errors_are_distinct() {
    let mut payload = encode_payload(&golden_telemetry(), &golden_field()).unwrap();
    let n = u16::from_be_bytes([payload[41], payload[42]]);
    for declared in [n - 1, n + 1] {
        let mut p = payload.clone();
        p[41..43].copy_from_slice(&declared.to_be_bytes());
        assert!(matches!(
            decode_payload(&p),
            Err(WireError::SigLength { .. })
        ));
    }
    let mut p = payload.clone();
    p[50] = b'0';
    assert_eq!(decode_payload(&p), Err(WireError::Base58));
    let mut p = payload.clone();
    p[4..8].copy_from_slice(&900_000_001i32.to_be_bytes());
    assert!(matches!(
        decode_payload(&p),
        Err(WireError::OutOfRange {
            field: "drone latitude",
            ..
        })
    ));

    let mut field = golden_field();
    field.body.clear();
    let mut raw = field.raw();
    raw[1] = 3;
    let text = bs58::encode(&raw).into_string();
    payload.truncate(41);
    payload.extend_from_slice(&(text.len() as u16).to_be_bytes());
    payload.extend_from_slice(text.as_bytes());
    assert_eq!(decode_payload(&payload), Err(WireError::UnknownMode(3)));
}

#[test]
fn oversize_payload_rejected() {
    let mut field = golden_field();
    field.body = vec![7; 2000];
    assert!(matches!(
        encode_payload(&golden_telemetry(), &field),
        Err(WireError::Oversize(_))
    ));
    assert_eq!(MAX_PAYLOAD, 2312 - 34);
}

#[test]
fn truncation_at_every_boundary_errors() {
    let frame = golden_frame();
    for cut in 0..frame.len() {
        assert!(decode_frame(&frame[..cut]).is_err());
    }
    let payload = decode_frame(&frame).unwrap().payload;
    for cut in 0..payload.len() {
        assert!(decode_payload(&payload[..cut]).is_err());
    }
}

#[test]
fn cs_signature_fits_paper_budget() {
    let mut rng = ChaCha20Rng::seed_from_u64(300);
    let ctx = BilinearContext::<TypeA512>::default_for_engine();
    let (gpk, ik, _, mut reg) = cs_setup(&ctx, &mut rng);
    let (state, req) = cs_join_request(&ctx, &mut rng);
    let cert = cs_join_issue(&ctx, &ik, &req, &mut reg, &mut rng).unwrap();
    let gsk = cs_join_finalize(&ctx, &gpk, &state, &cert).unwrap();
    let t = golden_telemetry();
    for _ in 0..3 {
        let sig = cs_sign(&ctx, &gpk, &gsk, &t.to_bytes(), &mut rng);
        let field = SignatureField::from_cs(&gpk, &sig);
        assert_eq!(field.raw().len(), 984);
        let text = field.to_base58().len();
        assert!((1343..=1347).contains(&text), "{text}");
        let payload = encode_payload(&t, &field).unwrap();
        assert!((1386..=1390).contains(&payload.len()));
        let back = decode_payload(&payload).unwrap();
        let sig2 = back.signature.to_cs::<TypeA512>().unwrap();
        assert!(cs_verify(
            &ctx,
            &gpk,
            signed_message(&payload).unwrap(),
            &sig2
        ));
        assert!(matches!(
            back.signature.to_ds::<Bn254>(),
            Err(WireError::ModeMismatch { .. })
        ));
        assert!(matches!(
            back.signature.to_cs::<Bn254>(),
            Err(WireError::CurveMismatch { .. })
        ));
    }
}

/// Base58 length of `n` bytes whose first byte is 1: the value lies in
/// `[256^(n-1), 2 * 256^(n-1))`, so the digit count is bounded by the base-58
/// logarithms of the two ends.
fn base58_len_bounds(n: usize) -> (usize, usize) {
    let log = |x: f64| x.ln() / 58f64.ln();
    let e = (n - 1) as f64 * log(256.0);
    (e.floor() as usize + 1, (e + log(2.0)).floor() as usize + 1)
}

#[test]
fn ds_payload_sizes_follow_layout() {
    let mut rng = ChaCha20Rng::seed_from_u64(301);
    let ctx = BilinearContext::<Bn254>::default_for_engine();
    let (gpk, keys) = ds_setup(&ctx, &mut rng).unwrap();
    let mut reg = DsRegistry::default();
    let ua = dsig_keygen(&ctx, &mut rng);
    let (st, req) = ds_join_request(&ctx, &gpk, &ua.sk, &mut rng);
    let issued = ds_join_issue(&ctx, &keys, &gpk, &mut reg, &req, &ua.pk, &mut rng).unwrap();
    let member = ds_join_finalize(&ctx, &gpk, &st, &req, &ua.pk, &issued).unwrap();
    let t = golden_telemetry();
    for (mode, raw_len) in [(DsMode::Cca2, 424), (DsMode::Cpa, 264)] {
        let (lo, hi) = base58_len_bounds(raw_len);
        for _ in 0..20 {
            let sig = ds_sign(&ctx, &gpk, &member, mode, &t.to_bytes(), &mut rng);
            let field = SignatureField::from_ds(&gpk, &sig);
            assert_eq!(field.raw().len(), raw_len);
            let text = field.to_base58().len();
            assert!(
                (lo..=hi).contains(&text),
                "{mode:?} {text} not in {lo}..={hi}"
            );
            let frame = encode_frame(&RidFrame {
                addr3: [0; 6],
                seq_ctl: 0,
                addr4: [0; 6],
                payload: encode_payload(&t, &field).unwrap(),
            })
            .unwrap();
            assert!(frame.len() <= MTU);
            let p = decode_payload(&decode_frame(&frame).unwrap().payload).unwrap();
            assert!(ds_verify(
                &ctx,
                &gpk,
                &t.to_bytes(),
                &p.signature.to_ds::<Bn254>().unwrap()
            ));
        }
    }
    assert_eq!(base58_len_bounds(424), (578, 578));
    assert_eq!(base58_len_bounds(264), (360, 360));
    assert_eq!(base58_len_bounds(984), (1343, 1343));
}

#[test]
fn frames_file_and_pcap() {
    let frames = vec![golden_frame(), vec![1, 2, 3], Vec::new()];
    let mut buf = Vec::new();
    write_frames_file(&mut buf, &frames).unwrap();
    assert_eq!(read_frames_file(buf.as_slice()).unwrap(), frames);
    assert!(read_frames_file(&buf[..buf.len() - 5]).is_err());

    let mut pcap = Vec::new();
    write_pcap(&mut pcap, &frames, &[1_500_000, 2_000_000, 2_500_001]).unwrap();
    assert_eq!(&pcap[..4], &[0xd4, 0xc3, 0xb2, 0xa1]);
    assert_eq!(
        u32::from_le_bytes(pcap[20..24].try_into().unwrap()),
        LINKTYPE_USER0
    );
    assert_eq!(
        pcap.len(),
        24 + 3 * 16 + frames.iter().map(Vec::len).sum::<usize>()
    );
    assert_eq!(u32::from_le_bytes(pcap[24..28].try_into().unwrap()), 1);
    assert_eq!(
        u32::from_le_bytes(pcap[28..32].try_into().unwrap()),
        500_000
    );
}

fn telemetry_strategy() -> impl Strategy<Value = Telemetry> {
    (
        any::<u32>(),
        -900_000_000i32..=900_000_000,
        -1_800_000_000i32..=1_800_000_000,
        any::<i32>(),
        any::<u32>(),
        0u32..36_000,
        (
            -900_000_000i32..=900_000_000,
            -1_800_000_000i32..=1_800_000_000,
            any::<i32>(),
        ),
        any::<u32>(),
        any::<u8>(),
    )
        .prop_map(
            |(
                group_id,
                drone_lat,
                drone_lon,
                drone_alt,
                drone_speed,
                drone_cog,
                (gcs_lat, gcs_lon, gcs_alt),
                timestamp,
                emergency,
            )| Telemetry {
                group_id,
                drone_lat,
                drone_lon,
                drone_alt,
                drone_speed,
                drone_cog,
                gcs_lat,
                gcs_lon,
                gcs_alt,
                timestamp,
                emergency,
            },
        )
}

fn roundtrip(
    t: Telemetry,
    mode: ModeTag,
    body: Vec<u8>,
    fp: [u8; 4],
    seq: u16,
) -> Result<(), TestCaseError> {
    let field = SignatureField {
        mode,
        curve: CurveId::Bn254,
        fingerprint: fp,
        body,
    };
    let payload = encode_payload(&t, &field).unwrap();
    let frame = encode_frame(&RidFrame {
        addr3: [9; 6],
        seq_ctl: seq,
        addr4: [3; 6],
        payload,
    })
    .unwrap();
    prop_assert!(frame.len() <= MTU);
    let back = decode_payload(&decode_frame(&frame).unwrap().payload).unwrap();
    prop_assert_eq!(back.telemetry, t);
    prop_assert_eq!(back.signature, field);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn roundtrip_cs(t in telemetry_strategy(), body in proptest::collection::vec(any::<u8>(), 0..1200), fp: [u8; 4], seq: u16) {
        roundtrip(t, ModeTag::Cs, body, fp, seq)?;
    }

    #[test]
    fn roundtrip_cca2(t in telemetry_strategy(), body in proptest::collection::vec(any::<u8>(), 0..600), fp: [u8; 4], seq: u16) {
        roundtrip(t, ModeTag::DsCca2, body, fp, seq)?;
    }

    #[test]
    fn roundtrip_cpa(t in telemetry_strategy(), body in proptest::collection::vec(any::<u8>(), 0..400), fp: [u8; 4], seq: u16) {
        roundtrip(t, ModeTag::DsCpa, body, fp, seq)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn decoders_are_total(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = decode_frame(&bytes);
        let _ = decode_payload(&bytes);
        let _ = SignatureField::from_raw(&bytes);
        let _ = SignatureField::from_base58(&bytes);
    }
}
