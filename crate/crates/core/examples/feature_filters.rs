//! Reads a small table from text and applies the CV and SD filters.

use aime::data_io::{align_samples, cv_filter, labeled_to_string, parse_labeled, sd_filter, Delimiter, Orientation};

const COUNTS: &str = "\
sample\tg1\tg2\tg3\tg4
a\t10\t5\t0\t100
b\t12\t5\t0\t300
c\t11\t5\t0\t50
d\t30\t5\t0\t700
";

// features in rows this time
const METH: &str = "\
feature,b,a,d
cg1,0.1,0.9,0.5
cg2,0.5,0.5,0.6
";

fn main() -> aime::Result<()> {
    let x = parse_labeled(COUNTS, Delimiter::Tab, Orientation::SamplesInRows)?;
    let cv = cv_filter(&x, 0.05)?;
    println!("cv > 0.05: kept {:?}, dropped {} ({} undefined)", cv.matrix.feature_ids(), cv.dropped, cv.undefined);
    let sd = sd_filter(&x, 1.25)?;
    println!("sd > 1.25: kept {:?}", sd.matrix.feature_ids());

    let y = parse_labeled(METH, Delimiter::Comma, Orientation::FeaturesInRows)?;
    let (xa, ya) = align_samples(&cv.matrix, &y)?;
    println!("shared samples {:?}", xa.sample_ids());
    print!("{}", labeled_to_string(&ya, Delimiter::Tab));
    Ok(())
}
