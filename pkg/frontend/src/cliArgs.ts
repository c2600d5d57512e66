/** Tiny flag parser shared by the two plot commands. */

export function parseInOut(argv: string[], prog: string): { inDir: string; outDir: string } {
  let inDir: string | null = null;
  let outDir: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--in") inDir = argv[++i];
    else if (argv[i] === "--out") outDir = argv[++i];
    else throw new Error(`unknown argument '${argv[i]}'; usage: ${prog} --in <dir> --out <dir>`);
  }
  if (!inDir || !outDir) {
    throw new Error(`usage: ${prog} --in <dir> --out <dir>`);
  }
  return { inDir, outDir };
}
