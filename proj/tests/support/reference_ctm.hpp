#ifndef FACTM_TESTS_REFERENCE_CTM_HPP
#define FACTM_TESTS_REFERENCE_CTM_HPP

#include <Eigen/Dense>

#include <utility>
#include <vector>

// A standalone correlated topic model over bags of sentences (every
// sentence carries one topic), written from the model equations with plain
// containers. Used as an oracle for the structured-view engine with the link
// switched off.
namespace reference {

using Words = std::vector<std::pair<int, double>>;  // (vocabulary index, count)

struct Corpus {
  int vocab = 0;
  std::vector<std::vector<Words>> docs;  // doc -> sentence -> words
};

struct Ctm {
  int topics = 0;
  double alpha0 = 1.0;
  std::vector<std::vector<double>> eta_mean, eta_var;  // doc x topic
  std::vector<double> zeta;                            // doc
  std::vector<std::vector<std::vector<double>>> phi;   // doc x sentence x topic
  std::vector<std::vector<double>> lambda;             // topic x vocab
  std::vector<double> mu0;
  Eigen::MatrixXd sigma0;
};

void update_phi(Ctm& m, const Corpus& c);
/// Returns the number of documents whose optimizer hit the iteration cap.
int update_eta(Ctm& m, int max_iters, double grad_tol);
void update_lambda(Ctm& m, const Corpus& c);
void update_population(Ctm& m);

/// Word-level CTM (one topic per word occurrence); phi is per distinct word.
struct WordCtm {
  int topics = 0;
  double alpha0 = 1.0;
  std::vector<std::vector<double>> eta_mean, eta_var;
  std::vector<double> zeta;
  std::vector<std::vector<std::vector<double>>> phi;  // doc x distinct word x topic
  std::vector<std::vector<double>> lambda;
  std::vector<double> mu0;
  Eigen::MatrixXd sigma0;
};

void word_update_phi(WordCtm& m, const std::vector<Words>& docs);
void word_update_eta(WordCtm& m, const std::vector<Words>& docs, int max_iters, double grad_tol);
void word_update_lambda(WordCtm& m, const std::vector<Words>& docs, int vocab);

}  // namespace reference

#endif  // FACTM_TESTS_REFERENCE_CTM_HPP
