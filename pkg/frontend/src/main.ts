import { bootstrap } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8000";
const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
bootstrap(baseUrl, root);
