//! Exact Laurent arithmetic: products, exact division, substitution and the
//! positivity test used on cluster variables.
use tildea::LaurentPoly;

fn main() {
    let x = LaurentPoly::var(2, 0);
    let y = LaurentPoly::var(2, 1);
    let one = LaurentPoly::one(2);
    let names = ["x".to_string(), "y".to_string()];

    // two steps of the Kronecker exchange
    let x1 = (&y.pow(2) + &one).try_div_exact(&x).unwrap();
    let x2 = (&x1.pow(2) + &one).try_div_exact(&y).unwrap();
    println!("x' = {}", x1.display_with(&names));
    println!("x'' = {}", x2.display_with(&names));

    let (numerator, denominator) = x2.reduced_form().unwrap();
    println!("numerator {} over x^{} y^{}", numerator.display_with(&names), denominator[0], denominator[1]);
    println!("non-negative numerator: {}", x2.has_nonneg_numerator().unwrap());

    // x + y is not a divisor of x^2 + y^2
    let sum = &x + &y;
    println!("(x^2 + y^2) / (x + y): {:?}", (&x.pow(2) + &y.pow(2)).try_div_exact(&sum).err());

    // evaluate at x = y = 1, then swap in x = 1/y, y = x
    let at_one = x2.substitute(&[one.clone(), one.clone()]).unwrap();
    println!("x''(1, 1) = {at_one}");
    let inverse_y = one.shift(&[0, -1]);
    println!("x''(1/y, x) = {}", x2.substitute(&[inverse_y, x.clone()]).unwrap().display_with(&names));
    // coefficients stay integral, so x = 2 leaves the ring here
    println!("x''(2, y): {:?}", x2.substitute(&[LaurentPoly::constant(2, 2), y.clone()]).err());
    println!("json: {}", serde_json::to_string(&x1).unwrap());
}
