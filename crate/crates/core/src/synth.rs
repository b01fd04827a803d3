//! Seeded synthetic data: separable Gaussian blobs, noisy XOR, and a small
//! loan book in the accepted-loans CSV layout.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::DesignMatrix;
use crate::rng;

/// Two isotropic unit-variance Gaussian classes in the plane, centred at
/// the origin (class 0) and at `(separation, separation)` (class 1).
/// Labels alternate 0, 1, 0, ...
pub fn gaussian_blobs(n: usize, separation: f64, seed: u64) -> DesignMatrix {
    let mut rng = rng::stream(seed, 0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let centre = if label == 1 { separation } else { 0.0 };
        x.push(centre + normal.sample(&mut rng));
        x.push(centre + normal.sample(&mut rng));
        y.push(label);
    }
    DesignMatrix::new(vec!["x0".into(), "x1".into()], x, y).expect("consistent shape")
}

/// Points uniform on `[-1, 1]^2` labelled by the sign-XOR of the two
/// coordinates, each label flipped with probability `noise`.
pub fn noisy_xor(n: usize, noise: f64, seed: u64) -> DesignMatrix {
    let mut rng = rng::stream(seed, 0);
    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        let mut label = u8::from((a > 0.0) != (b > 0.0));
        if rng.random_bool(noise) {
            label = 1 - label;
        }
        x.push(a);
        x.push(b);
        y.push(label);
    }
    DesignMatrix::new(vec!["x0".into(), "x1".into()], x, y).expect("consistent shape")
}

/// Header of [`loan_book_csv`]; covers the default column spec.
pub const LOAN_BOOK_HEADER: &str = "id,loan_amnt,funded_amnt,term,int_rate,grade,sub_grade,purpose,annual_inc,dti,open_acc,total_acc,fico_range_low,loan_status,total_rec_prncp,recoveries,issue_d,last_pymnt_d,emp_title,emp_length,title";

/// A synthetic loan book. Default risk rises with interest rate and DTI and
/// falls with FICO; about a tenth of loans are still current and a few
/// cells are blank.
pub fn loan_book_csv(n: usize, seed: u64) -> String {
    const PURPOSES: [&str; 5] = [
        "car",
        "credit_card",
        "debt_consolidation",
        "home_improvement",
        "small_business",
    ];
    const MONTHS: [&str; 12] = [
        "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
    ];
    let mut rng = rng::stream(seed, 0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = String::from(LOAN_BOOK_HEADER);
    out.push('\n');
    for i in 0..n {
        let grade_idx = rng.random_range(0..7usize);
        let grade = (b'A' + grade_idx as u8) as char;
        let sub = rng.random_range(1..=5usize);
        let int_rate =
            6.0 + grade_idx as f64 * 3.5 + sub as f64 * 0.6 + normal.sample(&mut rng) * 0.5;
        let term = if rng.random_bool(0.7) { 36 } else { 60 };
        let amount = (rng.random_range(10..=400usize) * 100) as f64;
        let annual_inc = (40_000.0 * (0.5 * normal.sample(&mut rng)).exp()).round();
        let dti: f64 = rng.random_range(0.0..40.0);
        let open_acc = rng.random_range(2..30usize);
        let total_acc = open_acc + rng.random_range(0..40usize);
        let fico = 660 + 5 * rng.random_range(0..30usize);
        let purpose = PURPOSES[rng.random_range(0..PURPOSES.len())];

        let z = -4.0 + 0.25 * (int_rate - 6.0) + 0.05 * dti - 0.02 * (fico as f64 - 700.0)
            + 0.5 * normal.sample(&mut rng);
        let p_default = 1.0 / (1.0 + (-z).exp());
        let current = rng.random_bool(0.1);
        let defaulted = rng.random_bool(p_default);
        let status = match (current, defaulted) {
            (true, _) => "Current",
            (false, true) => "Charged Off",
            (false, false) => "Fully Paid",
        };
        let issue_year = 2012 + rng.random_range(0..4usize);
        let issue_month = rng.random_range(0..12usize);
        let elapsed = match status {
            "Fully Paid" => term,
            "Charged Off" => rng.random_range(3..term),
            _ => rng.random_range(1..term),
        };
        let paid_fraction = elapsed as f64 / term as f64;
        let received = match status {
            "Fully Paid" => amount,
            _ => (amount * paid_fraction * 0.9).round(),
        };
        let recoveries = if status == "Charged Off" {
            ((amount - received) * rng.random_range(0.0..0.2)).round()
        } else {
            0.0
        };
        let last = issue_year * 12 + issue_month + elapsed;
        let dti_cell = if rng.random_bool(0.02) {
            String::new()
        } else {
            format!("{dti:.2}")
        };
        let emp_length = if rng.random_bool(0.05) {
            String::new()
        } else {
            format!("{} years", rng.random_range(1..10usize))
        };
        out.push_str(&format!(
            "{id},{amount},{amount},{term} months,{int_rate:.2}%,{grade},{grade}{sub},{purpose},{annual_inc},{dti_cell},{open_acc},{total_acc},{fico},{status},{received},{recoveries},{im}-{iy},{lm}-{ly},\"Employer, Inc\",{emp_length},Loan {i}\n",
            id = 100_000 + i,
            im = MONTHS[issue_month],
            iy = issue_year,
            lm = MONTHS[last % 12],
            ly = last / 12,
        ));
    }
    out
}
