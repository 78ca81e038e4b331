mod common;

use tensorfree::io::{load, read_binary, save, write_binary};

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let x = common::random_matrix(&[2, 3, 2], 4);
    for name in ["x.tfm", "x.csv"] {
        let path = dir.path().join(name);
        save(&x, &path).unwrap();
        let y = load(&path).unwrap();
        assert_eq!(y.dims(), x.dims());
        assert_eq!(y, x, "{name}");
    }
}

#[test]
fn header_is_checked() {
    let x = common::random_matrix(&[2, 2], 5);
    let mut buf = Vec::new();
    write_binary(&x, &mut buf).unwrap();
    assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 2);
    // entry (0, 0) right after the header
    assert_eq!(f64::from_le_bytes(buf[28..36].try_into().unwrap()), x.get(0, 0).re);
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_binary(&bad[..]).is_err());
    let mut bad = buf.clone();
    bad[4] = 9;
    assert!(read_binary(&bad[..]).is_err());
    let mut huge = buf[..12].to_vec();
    huge[8] = 1;
    huge.extend_from_slice(&(1u64 << 20).to_le_bytes());
    assert!(read_binary(&huge[..12 + 8]).is_err());
}

#[test]
fn malformed_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "# dims: 2\n1,0,0,0\n0,0\n").unwrap();
    assert!(load(&path).is_err());
    std::fs::write(&path, "1,0,0,0\n").unwrap();
    assert!(load(&path).is_err());
}
