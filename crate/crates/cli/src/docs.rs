//! Long help texts describing exit codes and JSON output fields.

pub const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid parameters, unreadable or malformed graph file
  3  graph does not match the scenario
  4  a verification check failed

All JSON output carries a \"schema\" key. Probabilities and residuals are
rounded to 12 significant digits. Complex numbers are [re, im] pairs.
Scenario parameters appear as {\"scenario\": name, ...sizes}.";

pub const SEARCH: &str = "\
JSON fields (schema qwalk.search/1):
  params               scenario and sizes
  steps                steps actually run
  n_star               optimal step count (equal to steps unless --steps)
  theta                eigenphase splitting parameter, null if undefined
  p_target             mass on the target edges after `steps` steps
  p_hidden             mass on the hidden edges (the not-found outcome)
  p_success            p_target, plus for star-loop the mass recovered by one retry
  predicted_p_target   closed-form expectation at n_star, or null
  predicted_p_hidden   closed-form expectation at n_star, or null
  target_edges         list of [j, k] target edges
  retry                star-loop only: {collapsed, p_target, p_hidden} one step after a not-found
  distribution         list of {edge: [j, k], p, hidden} for every edge
A comma-separated --n (or --n1) runs a sweep; output is then
{\"schema\": \"qwalk.sweep/1\", \"runs\": [<search objects>]}.";

pub const SCAN: &str = "\
CSV columns: n,p_target,p_hidden with one row for each n in 0..=n_max.
JSON summary fields (schema qwalk.scan/1):
  params       scenario and sizes
  n_max        last step
  rows         n_max + 1
  argmax       step maximizing p_target + p_hidden
  max_p_target, max_p_hidden   values at argmax
  n_star       optimal step count, or null";

pub const VERIFY: &str = "\
JSON fields (schema qwalk.verify/1):
  params      scenario and sizes
  tolerance   bound used for the exact checks (--tol or QWALK_TOL)
  passed      true iff every check passed
  failing     names of failed checks
  checks      list of {name, value, tolerance, passed, detail}
Check names:
  unitarity             max |U^dagger U - I| entry of the full operator
  basis_orthonormality  max |B^dagger B - I| entry of the collective basis
  invariance            max norm of the part of U b outside the basis
  closed_form           max entry difference to the closed-form reduced matrix
  reduced_unitarity     unitarity of the closed-form reduced matrix
  psi_invariance        two-stars only: the 8-dimensional basis
  square_blocks         two-stars only: block structure of the squared step
  char_poly             max coefficient difference to the closed-form polynomial
  eigen_residual        max |A v - lambda v| of the reduced eigensystem
  unit_circle           max ||lambda| - 1|
  degeneracy            the limit polynomial has a double root for this phase
  prediction            distance of the nearest exact eigenvalues to lambda0 +- delta,
                        within theta / 2";

pub const DETECT: &str = "\
JSON fields (schema qwalk.detect/1), single trial:
  params, present, confidence, repetitions, not_found_outcomes, p_not_found
  confidence is 1 when a not-found outcome was observed, otherwise the
  probability that an existing extra edge would have shown up.
With --trials > 1: params, trials, flagged, frequency, repetitions, p_not_found.";

pub const BASELINE: &str = "\
JSON fields (schema qwalk.baseline/1):
  params
  classical   {scanned_entries, certifying_entries, certifying, list_entries,
               probes_expected, probes_observed_mean, std_error, trials}
  quantum     {n_star, p_success}
  speedup     {n_star, p_success, repetitions, quantum_steps_total,
               classical_probes, ratio, list_entries, ratio_to_list, reference_ratio}
  ratio is quantum_steps_total / probes_expected.";

pub const SPECTRUM: &str = "\
JSON fields (schema qwalk.spectrum/1):
  params
  labels          names of the reduced basis vectors
  char_poly       monic coefficients, highest degree first, as [re, im]
  eigenvalues     list of {value: [re, im], phase, vector: [[re, im], ...]}
  prediction      {lambda0, delta, theta, lambda_plus, lambda_minus,
                   eigvec_plus, eigvec_minus, theta_approx} or null
  prediction_error  distance of the exact eigenvalues to the prediction, or null
  degeneracy_error  message when no degenerate pair exists, or null
A size list runs a sweep, output {\"schema\": \"qwalk.sweep/1\", \"runs\": [...]}.";
